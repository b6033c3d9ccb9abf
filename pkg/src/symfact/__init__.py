"""symfact: symmetric B B* - C C* factorizations of structured matrices.

Hankel and Hermitian Toeplitz matrices factor in near-linear time through a
fold-and-recurse identity; symmetric matrices with small Sylvester
displacement rank (notably Hankel inverses) factor by a half-depth variant.
Factors are implicit operator trees with fast apply, and drive a
difference-of-squares certificate for even univariate polynomials.
"""

from .core import (BlockFoldUnitary, BlockShift, BlockShiftUp, Exchange,
                   FoldUnitary, HankelGen, MaskE, ShiftDown, ShiftUp,
                   StructuredOp, SwapF, ToeplitzGen, apply_structured,
                   dense_from_json, dense_to_json, generator_from_json,
                   generator_to_json, hankel_materialize, hankel_matvec,
                   is_bisymmetric, is_centrosymmetric, is_hermitian,
                   is_persymmetric, is_skew_symmetric, key_identity_split,
                   materialize_op, numeric_rank, pad_to_power_of_two,
                   stein_displacement, sylvester_displacement,
                   toeplitz_materialize, toeplitz_matvec)
from .displacement import (check_displacement, displacement_factor,
                           factor_displacement_block, factor_nt_general,
                           fold_level, hankel_inverse_factor)
from .errors import (DimensionError, NumericError, ParseError,
                     PreconditionError, SizeCapError)
from .factors import (BaseVector, Concat, DenseBlock, FactorNode, FactorPair,
                      PermutedCopy, ScaledIdentity, ShiftExpand,
                      UnitaryPrefix, deserialize, deserialize_pair, serialize,
                      serialize_pair)
from .hankel import (HLevelState, NLevelState, factor_final, factor_nt,
                     hankel_factor, initial_state, split_level)
from .krylov import (KrylovSpec, SparseMatrix, apply_K, apply_K_transpose,
                     block_shift_displacement_rank, build_block_hankel,
                     build_krylov, random_sparse)
from .sos import (Polynomial, SquareTerm, evaluate_terms, gram_hankel,
                  sos_decompose, verify_decomposition)
from .toeplitz import BorderedCross, hermitian_toeplitz_factor, rank2_factor

__version__ = "0.1.0"
