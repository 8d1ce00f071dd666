//! Built-in artwork presets and structural checks on their renders.

use std::collections::BTreeMap;
use std::fmt;

use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::color::{apply_adjustment, hsv_to_rgb, ColorAdjustment, HsvColor};
use crate::dynamics::{escape_steps, index_to_coord, Complex, EscapeBudget, Viewport};
use crate::render::PixelBuffer;
use crate::scene::ast::{Expr, ExprKind, Item, Span};
use crate::scene::{parse, pretty_print, tokenize, SceneError};

/// Side of the renders that `verify_structure` and the golden digests expect.
pub const REFERENCE_SIZE: u32 = 1000;

const GOLDEN: &str = include_str!("../golden/digests.txt");

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GalleryError {
    #[error("unknown preset '{0}' (known: basic, fjords, forest, ragnarok, battle, leaves, crucified, blood)")]
    UnknownPreset(String),
    #[error("structural checks need a {REFERENCE_SIZE}x{REFERENCE_SIZE} render with no border, got {width}x{height}")]
    ReferenceSize { width: u32, height: u32 },
    #[error("no constant named '{0}'")]
    UnknownConstant(String),
    #[error(transparent)]
    Scene(#[from] SceneError),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Preset {
    pub name: &'static str,
    pub title: &'static str,
    pub source: &'static str,
    /// `-v` tag the artwork is rendered with.
    pub variation: &'static str,
    pub seed: Complex,
    /// Region of the plane sampled by the grid.
    pub viewport: Viewport,
    pub max_steps: u32,
    /// Grid points per side.
    pub resolution: usize,
}

pub const NAMES: [&str; 8] = ["basic", "fjords", "forest", "ragnarok", "battle", "leaves", "crucified", "blood"];

fn vp(left: f64, right: f64, bottom: f64, top: f64) -> Viewport {
    Viewport::new(left, right, bottom, top).expect("preset viewport")
}

pub fn preset(name: &str) -> Result<Preset, GalleryError> {
    let p = |name, title, source, seed: (f64, f64), viewport, max_steps| Preset {
        name,
        title,
        source,
        variation: "",
        seed: Complex::new(seed.0, seed.1),
        viewport,
        max_steps,
        resolution: 1000,
    };
    Ok(match name {
        "basic" => p(
            "basic",
            "Basic Julia set",
            include_str!("../presets/basic.cfdg"),
            (-0.381966, 0.618034),
            vp(-1.4, 1.4, -1.4, 1.4),
            40,
        ),
        "fjords" => p(
            "fjords",
            "Frozen Fjords",
            include_str!("../presets/fjords.cfdg"),
            (-1.384286, 0.004286),
            vp(0.01, 0.09, 0.02, 0.10),
            300,
        ),
        "forest" => Preset {
            variation: "PAJBHA",
            ..p(
                "forest",
                "The Wail of the Pripyat Forest",
                include_str!("../presets/forest.cfdg"),
                (-0.381966, 0.618034),
                vp(-0.052857, 0.188571, -0.105714, 0.135714),
                200,
            )
        },
        "ragnarok" => p(
            "ragnarok",
            "Ragnarök",
            include_str!("../presets/ragnarok.cfdg"),
            (-1.4, 0.0),
            vp(-0.6, 0.6, -0.6, 0.6),
            100,
        ),
        "battle" => p(
            "battle",
            "The Battle for Smolensk",
            include_str!("../presets/battle.cfdg"),
            (0.39, -0.252857),
            vp(0.21 - 0.84 / 2.0, 0.21 + 0.84 / 2.0, -0.445714 - 0.84 / 2.0, -0.445714 + 0.84 / 2.0),
            400,
        ),
        "leaves" => p(
            "leaves",
            "Under the shade of leaves",
            include_str!("../presets/leaves.cfdg"),
            (-1.384286, 0.004286),
            vp(0.01, 0.09, 0.02, 0.10),
            60,
        ),
        "crucified" => p(
            "crucified",
            "The crucified",
            include_str!("../presets/crucified.cfdg"),
            (-1.39, 0.0),
            vp(-0.02, 0.02, -0.355, -0.315),
            200,
        ),
        "blood" => p(
            "blood",
            "Blood sprinkle",
            include_str!("../presets/blood.cfdg"),
            (0.39, -0.252857),
            vp(0.21 - 0.84 / 2.0, 0.21 + 0.84 / 2.0, -0.445714 - 0.84 / 2.0, -0.445714 + 0.84 / 2.0),
            150,
        ),
        other => return Err(GalleryError::UnknownPreset(other.to_string())),
    })
}

pub fn presets() -> Vec<Preset> {
    NAMES.iter().map(|n| preset(n).expect("built-in")).collect()
}

/// Rewrites constant `name` to `value` and returns the canonical source.
/// Comments are not preserved.
pub fn set_constant(source: &str, name: &str, value: f64) -> Result<String, GalleryError> {
    let mut program = parse(&tokenize(source)?)?;
    let literal = if value < 0.0 || (value == 0.0 && value.is_sign_negative()) {
        Expr::new(ExprKind::Neg(Box::new(Expr::new(ExprKind::Num(-value), Span::default()))), Span::default())
    } else {
        Expr::new(ExprKind::Num(value), Span::default())
    };
    let def = program.items.iter_mut().find_map(|i| match i {
        Item::Const(c) if c.name == name => Some(c),
        _ => None,
    });
    match def {
        Some(c) => c.value = literal,
        None => return Err(GalleryError::UnknownConstant(name.to_string())),
    }
    Ok(pretty_print(&program))
}

/// Lowercase hex SHA-256 over the dimensions and samples.
pub fn digest(buf: &PixelBuffer) -> String {
    let mut h = Sha256::new();
    h.update(buf.width().to_le_bytes());
    h.update(buf.height().to_le_bytes());
    h.update(buf.data());
    h.finalize().iter().map(|b| format!("{b:02x}")).collect()
}

/// Recorded digests of the reference renders, by preset name.
pub fn golden_digests() -> BTreeMap<String, String> {
    parse_golden(GOLDEN)
}

pub fn parse_golden(text: &str) -> BTreeMap<String, String> {
    text.lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .filter_map(|l| {
            let mut parts = l.split_whitespace();
            Some((parts.next()?.to_string(), parts.next()?.to_string()))
        })
        .collect()
}

pub fn format_golden(digests: &BTreeMap<String, String>) -> String {
    let mut out = String::from("# preset sha256 of the 1000x1000 border-0 render; rewrite with `juliart golden --write`\n");
    for (name, d) in digests {
        out.push_str(&format!("{name} {d}\n"));
    }
    out
}

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: &'static str,
    /// Up to a handful of failing locations.
    pub failures: Vec<String>,
    pub failed: usize,
    pub examined: usize,
}

impl Check {
    pub fn passed(&self) -> bool {
        self.failed == 0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StructureReport {
    pub preset: String,
    pub checks: Vec<Check>,
}

impl StructureReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(Check::passed)
    }
}

impl fmt::Display for StructureReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.checks {
            let status = if c.passed() { "ok  " } else { "FAIL" };
            write!(f, "{status} {}: {} {} of {} examined", self.preset, c.name, c.failed, c.examined)?;
            if !c.failures.is_empty() {
                write!(f, " (first: {})", c.failures.join("; "))?;
            }
            writeln!(f)?;
        }
        Ok(())
    }
}

const SHOWN: usize = 5;

struct Tally {
    name: &'static str,
    failures: Vec<String>,
    failed: usize,
    examined: usize,
}

impl Tally {
    fn new(name: &'static str) -> Self {
        Self { name, failures: Vec::new(), failed: 0, examined: 0 }
    }

    fn record(&mut self, ok: bool, what: impl FnOnce() -> String) {
        self.examined += 1;
        if !ok {
            self.failed += 1;
            if self.failures.len() < SHOWN {
                self.failures.push(what());
            }
        }
    }

    fn done(self) -> Check {
        Check { name: self.name, failures: self.failures, failed: self.failed, examined: self.examined }
    }
}

fn rgb(h: f64, s: f64, b: f64) -> [u8; 3] {
    let c = apply_adjustment(HsvColor::BLACK, ColorAdjustment::hue(h).expect("finite"));
    let c = apply_adjustment(c, ColorAdjustment::saturation(s.clamp(-1.0, 1.0)).expect("in range"));
    let c = apply_adjustment(c, ColorAdjustment::brightness(b.clamp(-1.0, 1.0)).expect("in range"));
    hsv_to_rgb(c).to_rgb8()
}

fn ramp_up(n: u32, max: u32) -> f64 {
    (n as f64 - 1.0) / (max as f64 - 1.0)
}

fn ramp_down(n: u32, max: u32) -> f64 {
    1.0 + (1.0 - n as f64) / (max as f64 - 1.0)
}

/// Escape count of the grid point nearest each pixel centre, or `None`
/// outside the grid.
fn grid_counts(p: &Preset, buf: &PixelBuffer) -> Vec<Option<u32>> {
    let inv = buf.world_to_image().inverse().expect("non-degenerate mapping");
    let v = &p.viewport;
    let res = p.resolution;
    let step_x = (v.right() - v.left()) / (res - 1) as f64;
    let step_y = (v.top() - v.bottom()) / (res - 1) as f64;
    let budget = EscapeBudget::new(p.max_steps).expect("positive");
    let mut out = Vec::with_capacity((buf.width() * buf.height()) as usize);
    for py in 0..buf.height() {
        for px in 0..buf.width() {
            let (wx, wy) = inv.apply(px as f64 + 0.5, py as f64 + 0.5);
            let j = ((wx - v.left()) / step_x).round();
            let i = ((wy - v.bottom()) / step_y).round();
            if !(0.0..res as f64).contains(&j) || !(0.0..res as f64).contains(&i) {
                out.push(None);
                continue;
            }
            let zr = index_to_coord(j as usize, v.left(), v.right(), res).expect("in range");
            let zi = index_to_coord(i as usize, v.bottom(), v.top(), res).expect("in range");
            out.push(Some(escape_steps(Complex::new(zr, zi), p.seed, budget)));
        }
    }
    out
}

/// Every pixel has the colour the preset's scene assigns to its grid point's
/// escape count.
fn color_rule(p: &Preset, buf: &PixelBuffer, counts: &[Option<u32>], expect: impl Fn(Option<u32>) -> [u8; 3]) -> Check {
    let mut t = Tally::new("pixel colour follows escape count");
    let w = buf.width();
    for (k, c) in counts.iter().enumerate() {
        let (x, y) = (k as u32 % w, k as u32 / w);
        let want = expect(*c);
        let got = buf.pixel(x, y);
        t.record(got == want, || format!("({x},{y}) n={c:?} got {got:?} want {want:?}"));
    }
    let _ = p;
    t.done()
}

fn black_fraction(buf: &PixelBuffer) -> Check {
    let mut t = Tally::new("in-set fraction strictly between 0 and 1");
    let black = buf.data().chunks(3).filter(|px| px == &[0, 0, 0]).count();
    let total = buf.data().len() / 3;
    t.record(black > 0 && black < total, || format!("{black} of {total} pixels black"));
    t.done()
}

fn mirror_symmetry(buf: &PixelBuffer) -> Check {
    let mut t = Tally::new("four-fold mirror symmetry");
    let (w, h) = (buf.width(), buf.height());
    for y in 0..h {
        for x in 0..w {
            let a = buf.pixel(x, y);
            let ok = a == buf.pixel(w - 1 - x, y) && a == buf.pixel(x, h - 1 - y);
            t.record(ok, || format!("({x},{y})"));
        }
    }
    t.done()
}

fn saturation_monotone(buf: &PixelBuffer, counts: &[Option<u32>]) -> Check {
    let mut t = Tally::new("saturation non-decreasing in escape count");
    // per count: (min, max) of the rendered saturation proxy 255 - g
    let mut range: BTreeMap<u32, (u8, u8)> = BTreeMap::new();
    let w = buf.width();
    for (k, c) in counts.iter().enumerate() {
        if let Some(n) = c {
            let g = buf.pixel(k as u32 % w, k as u32 / w)[1];
            let s = 255 - g;
            let e = range.entry(*n).or_insert((s, s));
            e.0 = e.0.min(s);
            e.1 = e.1.max(s);
        }
    }
    let mut prev: Option<(u32, u8)> = None;
    for (&n, &(lo, hi)) in &range {
        if let Some((pn, phi)) = prev {
            t.record(lo >= phi, || format!("n={pn} reaches {phi}, n={n} drops to {lo}"));
        }
        prev = Some((n, hi));
    }
    t.done()
}

fn blood_cull(p: &Preset, buf: &PixelBuffer) -> Vec<Check> {
    // kept squares have n > 0.7·N, so saturation ≥ (⌊0.7·N⌋)/(N-1)
    let threshold = (0.7 * p.max_steps as f64).floor() as u32 + 1;
    let g_max = rgb(0.0, ramp_up(threshold, p.max_steps), 1.0)[1];
    let mut hue = Tally::new("painted pixels are pure red hue");
    let mut cull = Tally::new("no square at or below the proportion cull");
    let mut painted = 0usize;
    for y in 0..buf.height() {
        for x in 0..buf.width() {
            let px = buf.pixel(x, y);
            if px == [255, 255, 255] {
                continue;
            }
            painted += 1;
            hue.record(px[0] == 255 && px[1] == px[2], || format!("({x},{y}) {px:?}"));
            cull.record(px[1] <= g_max, || format!("({x},{y}) {px:?}"));
        }
    }
    let mut some = Tally::new("both painted and background pixels present");
    let total = (buf.width() * buf.height()) as usize;
    some.record(painted > 0 && painted < total, || format!("{painted} of {total} painted"));
    vec![hue.done(), cull.done(), some.done()]
}

fn forest_hues(buf: &PixelBuffer) -> Vec<Check> {
    let mut order = Tally::new("painted pixels have hue in the 60..120 sector");
    let mut white = 0usize;
    for y in 0..buf.height() {
        for x in 0..buf.width() {
            let [r, g, b] = buf.pixel(x, y);
            if [r, g, b] == [255, 255, 255] {
                white += 1;
                continue;
            }
            order.record(g >= r && r >= b, || format!("({x},{y}) {:?}", [r, g, b]));
        }
    }
    // the blocks' cell spacing is slightly wider than a pixel, leaving
    // hairline gaps that show the background
    let mut cover = Tally::new("blocks cover at least 97% of the canvas");
    let total = (buf.width() * buf.height()) as usize;
    cover.record(white * 100 <= total * 3, || format!("{white} of {total} background pixels"));
    vec![order.done(), cover.done()]
}

/// Structural checks of a reference render of preset `name`.
pub fn verify_structure(name: &str, buf: &PixelBuffer) -> Result<StructureReport, GalleryError> {
    let p = preset(name)?;
    if buf.width() != REFERENCE_SIZE || buf.height() != REFERENCE_SIZE {
        return Err(GalleryError::ReferenceSize { width: buf.width(), height: buf.height() });
    }
    let n = p.max_steps;
    let checks = match name {
        "basic" => {
            let counts = grid_counts(&p, buf);
            vec![
                color_rule(&p, buf, &counts, |c| match c {
                    Some(k) if k == n => [0, 0, 0],
                    _ => rgb(0.0, 0.0, 0.9),
                }),
                black_fraction(buf),
            ]
        }
        "fjords" | "leaves" | "crucified" => {
            let counts = grid_counts(&p, buf);
            let fill = match name {
                "fjords" => rgb(214.0, 0.89, 0.95),
                "leaves" => rgb(214.0, 0.7, 0.95),
                _ => rgb(0.0, 1.0, 1.0),
            };
            let square = move |k: u32| match name {
                "fjords" => rgb(30.0, 0.0, ramp_down(k, n)),
                "leaves" => rgb(120.0, 1.0, ramp_up(k, n)),
                _ => rgb(40.0, 0.5, ramp_down(k, n)),
            };
            let mut bg = Tally::new("background pixels show the fill colour");
            for (k, c) in counts.iter().enumerate() {
                if c.is_none_or(|k| k == n) {
                    let (x, y) = (k as u32 % buf.width(), k as u32 / buf.width());
                    let got = buf.pixel(x, y);
                    bg.record(got == fill, || format!("({x},{y}) {got:?}"));
                }
            }
            vec![
                bg.done(),
                color_rule(&p, buf, &counts, |c| match c {
                    Some(k) if k < n => square(k),
                    _ => fill,
                }),
            ]
        }
        "ragnarok" => {
            let counts = grid_counts(&p, buf);
            vec![
                mirror_symmetry(buf),
                black_fraction(buf),
                color_rule(&p, buf, &counts, |c| rgb(0.0, 0.0, ramp_down(c.unwrap_or(n), n))),
            ]
        }
        "battle" => {
            let counts = grid_counts(&p, buf);
            vec![
                saturation_monotone(buf, &counts),
                color_rule(&p, buf, &counts, |c| rgb(0.0, ramp_up(c.unwrap_or(1), n), 1.0)),
            ]
        }
        "blood" => blood_cull(&p, buf),
        "forest" => forest_hues(buf),
        _ => unreachable!("preset() accepted the name"),
    };
    Ok(StructureReport { preset: name.to_string(), checks })
}
