from .config import HarnessConfig, QuantConfig, SweepConfig, config_from_dict, load_config
from .io import emit_heatmap, heatmap_pixels, read_pgm
from .pipeline import RunRecord, evaluate_scene, run_pipeline, sweep, sweep_records
from .scene import SceneSpec, SceneTruth, default_camera, generate_scene, scene_weights
