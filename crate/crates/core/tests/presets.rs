use std::time::Instant;

use juliart_core::gallery::{digest, golden_digests, presets, verify_structure, REFERENCE_SIZE};
use juliart_core::render::{evaluate_scene, rasterize, VariationSeed};
use juliart_core::scene::{load, parse, pretty_print, tokenize};

#[test]
fn corpus_round_trips_through_the_printer() {
    for p in presets() {
        let program = parse(&tokenize(p.source).unwrap()).unwrap();
        let printed = pretty_print(&program);
        let again = parse(&tokenize(&printed).unwrap()).unwrap();
        assert_eq!(program, again, "{}", p.name);
        assert_eq!(pretty_print(&again), printed, "{}", p.name);
    }
}

#[test]
fn reference_renders_have_the_expected_structure() {
    let golden = golden_digests();
    for p in presets() {
        let t = Instant::now();
        let (_, c) = load(p.source).unwrap();
        let ev = evaluate_scene(&c, &VariationSeed::new(p.variation)).unwrap();
        let buf = rasterize(&ev.primitives, REFERENCE_SIZE, 0).unwrap();
        let report = verify_structure(p.name, &buf).unwrap();
        eprint!("{report}");
        eprintln!("{}: {} primitives, {:?}", p.name, ev.primitives.len(), t.elapsed());
        assert!(report.passed(), "{}", p.name);
        if let Some(want) = golden.get(p.name) {
            assert_eq!(&digest(&buf), want, "{} digest drifted", p.name);
        }
    }
}
