"""Blind, robust triangle-mesh watermarking.

A key-derived bit string is embedded into the vertex norms of perceptually
salient vertices with dithered quantization, extracted blindly from the mesh
alone, and benchmarked for imperceptibility and robustness against a standard
attack battery.
"""

__version__ = "0.1.0"

from .attacks import (
    AttackSpec,
    AttackSpecError,
    add_noise,
    apply_attack,
    crop,
    laplacian_smooth,
    parse_attack_spec,
    quantize_coords,
    reorder_elements,
    similarity_transform,
    subdivide_loop,
    subdivide_midpoint,
    subdivide_sqrt3,
)
from .bench import BenchConfig, BenchConfigError, parse_bench_config, run_bench
from .mesh import (
    Adjacency,
    Mesh,
    MeshError,
    NormalizationTransform,
    bbox_diagonal,
    build_adjacency,
    denormalize,
    normalize,
    rescale_vertex,
    vertex_norms,
)
from .meshio import (
    MeshParseError,
    load_mesh,
    parse_obj,
    parse_off,
    save_mesh,
    write_obj,
    write_off,
)
from .metrics import (
    DistanceReport,
    TriangleIndex,
    hausdorff,
    mrms,
    point_to_surface_distance,
    surface_distance,
)
from .qim import CapacityError, detect_bit, quantize_bit, quantize_bit_bounded
from .saliency import (
    CurvatureField,
    SaliencyMap,
    compute_saliency,
    gaussian_weighted_average,
    mean_curvature,
    neighborhood,
    select_salient,
)
from .watermark import (
    EmbedReport,
    WatermarkKey,
    assign_bins,
    correlation,
    embed,
    extract,
    generate_watermark,
    load_key,
    save_key,
)

__all__ = [
    "Adjacency",
    "AttackSpec",
    "AttackSpecError",
    "BenchConfig",
    "BenchConfigError",
    "CapacityError",
    "CurvatureField",
    "DistanceReport",
    "EmbedReport",
    "Mesh",
    "MeshError",
    "MeshParseError",
    "NormalizationTransform",
    "SaliencyMap",
    "TriangleIndex",
    "WatermarkKey",
    "add_noise",
    "apply_attack",
    "assign_bins",
    "bbox_diagonal",
    "build_adjacency",
    "compute_saliency",
    "correlation",
    "crop",
    "denormalize",
    "detect_bit",
    "embed",
    "extract",
    "gaussian_weighted_average",
    "generate_watermark",
    "hausdorff",
    "laplacian_smooth",
    "load_key",
    "load_mesh",
    "mean_curvature",
    "mrms",
    "neighborhood",
    "normalize",
    "parse_attack_spec",
    "parse_bench_config",
    "parse_obj",
    "parse_off",
    "point_to_surface_distance",
    "quantize_bit",
    "quantize_bit_bounded",
    "quantize_coords",
    "reorder_elements",
    "rescale_vertex",
    "run_bench",
    "save_key",
    "save_mesh",
    "select_salient",
    "similarity_transform",
    "subdivide_loop",
    "subdivide_midpoint",
    "subdivide_sqrt3",
    "surface_distance",
    "vertex_norms",
    "write_obj",
    "write_off",
]
