//! Shared fixtures for the benchmarks.

use xyzkit::procgen::{assemble_scene, SceneConfig, SceneRecord};
use xyzkit::render::{render_scene, RenderOutput};

/// The default 256×256 scene for `seed`, rendered.
pub fn rendered_scene(seed: u64) -> (SceneRecord, RenderOutput) {
    let scene = assemble_scene(seed, &SceneConfig::default()).expect("default scene");
    let render = render_scene(&scene).expect("render");
    (scene, render)
}
