use std::path::PathBuf;

use volpg::harness::{load_scene, parse_scene, presets, serialize_scene};

fn scene_file(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../scenes").join(format!("{name}.scene"))
}

#[test]
fn shipped_scene_files_match_the_presets() {
    for name in presets::PRESET_NAMES {
        let from_file = parse_scene(&scene_file(name)).unwrap();
        assert_eq!(from_file, presets::by_name(name, 256, 256).unwrap(), "{name}");
        assert_eq!(load_scene(name).unwrap(), from_file);
    }
}

#[test]
fn shipped_scene_files_are_canonical() {
    for name in presets::PRESET_NAMES {
        let text = std::fs::read_to_string(scene_file(name)).unwrap();
        assert_eq!(serialize_scene(&parse_scene(&scene_file(name)).unwrap()), text);
    }
}
