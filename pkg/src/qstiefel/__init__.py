"""Representations of quantum Stiefel manifolds on truncated Fock spaces.

Build generator rows from an admissible index tuple and torus angles,
verify the defining relations on a window away from the Fock cutoff,
and classify representations by their extraction tower.
"""

from .errors import (
    BundleFormatError,
    ClassificationError,
    ConfigError,
    InconsistentRepresentationError,
    NotIrreducibleError,
    NotIsomorphicError,
    QStiefelError,
    SpectrumViolationError,
    TruncationError,
)
from .fock import FactorShape, QParam, TruncOp, Window
from .qgroup import (
    admissible_tuples,
    convolve,
    counit_rep,
    elementary_rep,
    full_rep,
    path_evaluate,
    torus_rep,
    weyl_word,
    word_rep,
)
from .sphere import (
    OpTuple,
    angle_of,
    build_intertwiner,
    check_power_identity,
    check_sphere_relations,
    ground_space,
    ladder,
    model_tuple,
    omega_spectrum,
    phase_scale,
    rank_of,
)
from .stiefel import (
    Classification,
    StiefelGenerators,
    StiefelParams,
    build_generators,
    check_relations,
    check_vanishing,
    classify,
    closed_form_level,
    extract_tower,
    predicted_columns,
    rank_sequence,
    row_sphere_tuple,
    verify_closed_form,
)
from .bundle import read_bundle, write_bundle
from .report import phase_to_turns, turns_distance, turns_to_phase

__version__ = "0.1.0"
