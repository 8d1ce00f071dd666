use std::process::Command;

use juliart_cli::{render, RenderRequest};

fn juliart() -> Command {
    Command::new(env!("CARGO_BIN_EXE_juliart"))
}

fn preset_path(name: &str) -> String {
    format!("{}/../core/presets/{name}.cfdg", env!("CARGO_MANIFEST_DIR"))
}

fn decode(bytes: &[u8]) -> (u32, u32, Vec<u8>) {
    let mut r = png::Decoder::new(std::io::Cursor::new(bytes)).read_info().unwrap();
    let mut data = vec![0; r.output_buffer_size().unwrap()];
    let info = r.next_frame(&mut data).unwrap();
    data.truncate(info.buffer_size());
    (info.width, info.height, data)
}

#[test]
fn renders_a_scene_file_with_short_flags() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("fjords.png");
    let status = juliart()
        .args(["render", "-b", "0", "-s", "1000", &preset_path("fjords")])
        .arg(&out)
        .status()
        .unwrap();
    assert!(status.success());
    let (w, h, _) = decode(&std::fs::read(&out).unwrap());
    assert_eq!((w, h), (1000, 1000));
}

#[test]
fn missing_input_is_a_read_error() {
    let dir = tempfile::tempdir().unwrap();
    let o = juliart().args(["render", "missing.cfdg"]).arg(dir.path().join("o.png")).output().unwrap();
    assert_eq!(o.status.code(), Some(3));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("cannot read 'missing.cfdg'"), "{err}");
}

#[test]
fn error_classes_have_distinct_messages_and_codes() {
    let dir = tempfile::tempdir().unwrap();
    let mut seen = Vec::new();
    for (src, code, needle) in [
        ("shape s {}", 4, "semantic error: missing startshape"),
        ("startshape s\nshape s { SQUARE[ }", 4, "bad.cfdg:2:"),
        ("startshape s shape s { SQUARE[x 1/0] }", 4, "eval error"),
    ] {
        let input = dir.path().join("bad.cfdg");
        std::fs::write(&input, src).unwrap();
        let o = juliart().arg("render").arg(&input).arg(dir.path().join("o.png")).output().unwrap();
        let err = String::from_utf8_lossy(&o.stderr).to_string();
        assert_eq!(o.status.code(), Some(code), "{src}: {err}");
        assert!(err.contains(needle), "{src}: {err}");
        seen.push(err);
    }
    let bad_flag = juliart().args(["render", "-s", "ten", "a", "b"]).output().unwrap();
    assert_eq!(bad_flag.status.code(), Some(2));
    let too_small = juliart()
        .args(["render", "-s", "10", "-b", "5", &preset_path("basic")])
        .arg(dir.path().join("o.png"))
        .output()
        .unwrap();
    assert_eq!(too_small.status.code(), Some(2));
    seen.push(String::from_utf8_lossy(&too_small.stderr).to_string());
    seen.sort();
    seen.dedup();
    assert_eq!(seen.len(), 4);
}

#[test]
fn presets_list_and_dump() {
    let o = juliart().args(["presets", "list"]).output().unwrap();
    assert!(o.status.success());
    assert_eq!(String::from_utf8(o.stdout).unwrap().lines().count(), 8);
    let o = juliart().args(["presets", "dump", "ragnarok"]).output().unwrap();
    assert_eq!(String::from_utf8(o.stdout).unwrap(), std::fs::read_to_string(preset_path("ragnarok")).unwrap());
    let o = juliart().args(["presets", "dump", "nope"]).output().unwrap();
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn check_ragnarok_passes() {
    let o = juliart().args(["check", "ragnarok"]).output().unwrap();
    let text = String::from_utf8_lossy(&o.stdout);
    assert!(o.status.success(), "{text}");
    assert!(text.contains("mirror symmetry"));
}

#[test]
fn worker_count_does_not_change_output() {
    let dir = tempfile::tempdir().unwrap();
    let mut outputs = Vec::new();
    for w in ["1", "3"] {
        let out = dir.path().join(format!("forest{w}.png"));
        let status = juliart()
            .env("JULIART_WORKERS", w)
            .args(["render", "-s", "300", "-v", "PAJBHA", &preset_path("forest")])
            .arg(&out)
            .status()
            .unwrap();
        assert!(status.success());
        outputs.push(std::fs::read(out).unwrap());
    }
    assert_eq!(outputs[0], outputs[1]);
}

#[test]
fn cli_matches_library_render() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("battle.png");
    let status = juliart().args(["render", "-s", "200", "-b", "3", &preset_path("battle")]).arg(&out).status().unwrap();
    assert!(status.success());
    let job = RenderRequest { preset: Some("battle".into()), size: Some(200), border: Some(3), ..Default::default() }
        .into_job(4096)
        .unwrap();
    assert_eq!(std::fs::read(out).unwrap(), render(&job).unwrap().png);
}
