"""
martblocks: martingale Hardy and BMO norms, atomic blocks and their
certificates on finite filtrations and finite-dimensional tracial algebras.
"""
from .atoms import (davis_split, decompose_delta_indicator, decompose_H1_to_blocks,
                    duality_bound_check_p2, h1_atomic_decompose, pairing)
from .blocks import (CancelBlock, DecompositionReport, PAtom, Sigma1Block, Subatom,
                     subatom_l1_bound_check, validate_atom, validate_block)
from .exceptions import (CertificateError, ConfigurationError, DomainError,
                         LevelRangeError, MartblocksError, ReconstructionError,
                         SizeError)
from .lp import atb_norm_lp
from .medians import (MedianSequence, bmo_alpha_norm, build_block_indicator,
                      build_block_mediandiff, build_block_power, build_block_sign,
                      cm_lemma_check, cond_median, weak_atom, weak_atom_split)
from .nc import (BlockLevel, NCFiltration, col_BMO_norm, col_bmo_norm, col_H1_norm,
                 col_h1_norm, decompose_delta_projection, nc_cond_exp,
                 nc_duality_bound_check_p2, nc_pairing, schatten_norm,
                 spectral_proj_interval, truncate_block)
from .norms import (BMO_norm, H1_norm, NormParams, bmo_equiv_gap, bmo_norm,
                    diag_norm, h1_norm, hp_atb_quasinorm_upper, lambda_pq_norm)
from .probability import (Filtration, MartingaleView, WeightedSpace, cond_exp,
                          cond_square_function, mart_diff, square_function)

__version__ = "0.1.0"
