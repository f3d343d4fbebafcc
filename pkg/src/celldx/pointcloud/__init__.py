"""3D reconstruction: cameras, depth fusion, chamfer metric, file emission."""

from .camera import ViewPose, make_fixed_poses
from .chamfer import chamfer
from .fuse import DepthMapSet, PointCloud, fuse
from .generator import (
    GeneratorSpec,
    GenTrainConfig,
    build_generator,
    generate,
    generator_loss,
    load_generator_spec,
    predict_depth_maps,
    save_generator_spec,
    train_generator,
    training_inputs,
)
from .pcd import parse_pcd, pcd_to_obj, write_pcd
from .synth3d import (
    DEFAULT_RADIUS,
    RadialShape,
    emit_dataset,
    input_image_from_depth,
    random_shape,
    render_depth,
    render_depth_set,
    unit_sphere,
)

__all__ = [
    "ViewPose", "make_fixed_poses", "chamfer", "DepthMapSet", "PointCloud", "fuse",
    "GeneratorSpec", "GenTrainConfig", "build_generator", "generate", "generator_loss",
    "load_generator_spec", "predict_depth_maps", "save_generator_spec", "train_generator",
    "training_inputs", "parse_pcd", "pcd_to_obj", "write_pcd",
    "DEFAULT_RADIUS", "RadialShape", "emit_dataset", "input_image_from_depth",
    "random_shape", "render_depth", "render_depth_set", "unit_sphere",
]
