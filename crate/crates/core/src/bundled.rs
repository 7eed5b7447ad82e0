//! Scenes and mappings shipped with the crate.

use crate::error::{Error, Result};
use crate::geometry::{parse_scene, Scene};
use crate::mappings::{parse_mapping, SvMapping};

const SCENES: &[(&str, &str)] = &[
    ("ex3_1", include_str!("../data/scenes/ex3_1.json")),
    ("ex3_2", include_str!("../data/scenes/ex3_2.json")),
    ("ex3_3", include_str!("../data/scenes/ex3_3.json")),
    ("ex3_4", include_str!("../data/scenes/ex3_4.json")),
    ("orthogonal_lines", include_str!("../data/scenes/orthogonal_lines.json")),
    ("lines_pi6", include_str!("../data/scenes/lines_pi6.json")),
    ("interior_balls", include_str!("../data/scenes/interior_balls.json")),
];

const MAPPINGS: &[(&str, &str)] = &[
    ("linear_x", include_str!("../data/mappings/linear_x.json")),
    ("linear_2x", include_str!("../data/mappings/linear_2x.json")),
    ("parabola", include_str!("../data/mappings/parabola.json")),
];

pub fn scene_names() -> Vec<&'static str> {
    SCENES.iter().map(|(n, _)| *n).collect()
}

pub fn scene_text(name: &str) -> Option<&'static str> {
    SCENES.iter().find(|(n, _)| *n == name).map(|(_, t)| *t)
}

pub fn scene(name: &str) -> Result<Scene> {
    let text = scene_text(name).ok_or_else(|| Error::Schema(format!("no bundled scene {name:?}")))?;
    parse_scene(text)
}

pub fn mapping_names() -> Vec<&'static str> {
    MAPPINGS.iter().map(|(n, _)| *n).collect()
}

pub fn mapping_text(name: &str) -> Option<&'static str> {
    MAPPINGS.iter().find(|(n, _)| *n == name).map(|(_, t)| *t)
}

pub fn mapping(name: &str) -> Result<SvMapping> {
    let text = mapping_text(name).ok_or_else(|| Error::Schema(format!("no bundled mapping {name:?}")))?;
    parse_mapping(text)
}
