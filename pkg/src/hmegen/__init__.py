"""hmegen: dataset augmentation for handwritten mathematical expressions.

Generates new online expressions from a seed corpus by geometric
distortion, relation-tree decomposition, or both, and renders them to
offline images.
"""

from .decompose import (
    DecompositionResult,
    baseline_of,
    decompose,
    latex_of,
    operator_splits_of,
    script_parts_of,
)
from .distort import (
    Axis,
    DistortionParams,
    apply_perspective,
    apply_rotation,
    apply_scaling,
    apply_shear,
    apply_shrink,
    distort_hme,
    distort_symbol,
    sample_params,
)
from .errors import AlignmentError, InkmlParseError, StructureError
from .ink import (
    BoundingBox,
    OnlineHME,
    PenPoint,
    RelationLabel,
    SrtNode,
    Stroke,
    Symbol,
    SymbolRelationTree,
    bounding_box,
    denormalize_from_frame,
    normalize_to_frame,
)
from .inkml import build_srt, parse_inkml, read_inkml, write_inkml
from .pipeline import (
    DatasetReport,
    Strategy,
    StrategyConfig,
    generate_decomposition_set,
    generate_distortion_set,
    generate_hybrid_set,
    generate_set,
    load_corpus,
    verify_counts,
)
from .raster import Image, RasterConfig, draw_segment, rasterize

__version__ = "0.1.0"
