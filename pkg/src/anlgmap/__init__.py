"""Toolkit relating the linearity of cross-space word-embedding maps to
the preservation of analogy structure.

The package measures two things over a pair of monolingual embedding
spaces: how well the best linear map explains the ground-truth
correspondence between them (the negated fit residual, ``s_lmp``), and how
well analogy relations are encoded and preserved across them (the geometric
mean of the two monolingual analogy accuracies, ``s_pae``).  Supporting
machinery covers embedding loading, analogy solvers, parallel corpus
construction, exhaustive pairing verification, synthetic test spaces, and
correlation statistics.
"""

from .analogy import (
    AnalogyCategory,
    AnalogyQuestion,
    LRCosClassifier,
    LRCosConfig,
    OutOfVocabularyError,
    SolverResult,
    category_accuracy,
    generate_questions,
    read_category_file,
    read_corpus,
    solve_3cosadd,
    solve_3cosmul,
    solve_lrcos,
    solve_pairdistance,
    train_membership_classifier,
    write_category_file,
    write_corpus,
)
from .builder import (
    BuildReport,
    MonolingualAnalogySet,
    build_corpus,
    intersect_bilingual,
    load_monolingual_set,
    translate_pairs,
)
from .embeddings import (
    Embedding,
    VectorView,
    frobenius_normalize,
    load_text_vectors,
    load_text_vectors_cached,
    mean_center,
    unit_normalize_rows,
)
from .mapping import (
    AlignedMatrixPair,
    BilingualDictionary,
    GDConfig,
    LinearFit,
    build_aligned,
    category_dictionary,
    fit_linear_closed,
    fit_linear_gd,
    load_muse_dictionary,
    residual_norm,
)
from .stats import (
    CorrelationReport,
    IndicatorRecord,
    anova_two_treatment,
    build_indicator_grid,
    correlate_records,
    pearson_r,
    read_grid_csv,
    s_pae,
    spearman_rho,
    write_grid_csv,
)
from .synthetic import (
    Distortion,
    SweepRow,
    SynthSpec,
    apply_affine,
    apply_distortion,
    build_sweep_grid,
    evaluate_point,
    gen_analogy_space,
    gen_offset_preserving_pair,
    shuffled_control,
    sweep_correlation,
    theorem_sweep,
)
from .transport import (
    PairingScheme,
    enumerate_pairings,
    find_p_star,
    matching_count,
    offset_vectors,
    pairing_cost,
    total_cost,
    verify_best_pairing,
)

__version__ = "0.1.0"
