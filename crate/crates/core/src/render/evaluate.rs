//! Shape execution: turns a compiled scene into an ordered primitive list.

use std::sync::atomic::{AtomicU64, Ordering};

use rayon::prelude::*;

use super::stream::{child_key, RandStream, VariationSeed};
use super::transform::{compose_adjustments, Adjustment, Transform2D};
use crate::color::HsvColor;
use crate::scene::ast::{AdjustKind, PrimKind, Span};
use crate::scene::eval::{loop_count, AdjIr, Ctx, Ir, SIr, START_BRANCH};
use crate::scene::{Compiled, EscapePath, EvalError, RandDraw, SceneError, MAX_CALL_DEPTH};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Primitive {
    pub kind: PrimKind,
    /// Identity for fills.
    pub transform: Transform2D,
    pub color: HsvColor,
    pub index: u64,
}

impl Primitive {
    /// World position of the local origin.
    pub fn center(&self) -> (f64, f64) {
        (self.transform.e, self.transform.f)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Limits {
    pub max_primitives: u64,
    /// User-function body evaluations per render.
    pub max_iterations: u64,
    /// Nesting depth of function frames, and separately of shape calls.
    pub max_call_depth: u32,
}

impl Default for Limits {
    fn default() -> Self {
        Self { max_primitives: 100_000_000, max_iterations: 1_000_000_000, max_call_depth: MAX_CALL_DEPTH }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EvalOptions {
    pub limits: Limits,
    pub escape: EscapePath,
    /// Fan the first loop reached out over the current rayon pool.
    pub parallel: bool,
    /// Keep every `rand` draw, in evaluation order.
    pub record_draws: bool,
}

impl Default for EvalOptions {
    fn default() -> Self {
        Self { limits: Limits::default(), escape: EscapePath::Native, parallel: true, record_draws: false }
    }
}

#[derive(Debug, Clone, Default)]
pub struct Evaluation {
    pub primitives: Vec<Primitive>,
    pub iterations: u64,
    pub draws: Vec<RandDraw>,
}

/// Evaluates `scene` with default options.
pub fn evaluate_scene(scene: &Compiled, variation: &VariationSeed) -> Result<Evaluation, SceneError> {
    evaluate_scene_with(scene, variation, &EvalOptions::default())
}

pub fn evaluate_scene_with(
    scene: &Compiled,
    variation: &VariationSeed,
    opts: &EvalOptions,
) -> Result<Evaluation, SceneError> {
    let consts = scene.constant_values(variation, opts.escape)?;
    let exec = Exec {
        scene,
        consts: &consts,
        opts,
        primitives: AtomicU64::new(0),
        iterations: AtomicU64::new(0),
    };
    let mut w = Worker::new(false, 0);

    let start = &scene.shapes[scene.start as usize];
    let mut locals = vec![0.0; start.slots];
    {
        let mut ctx = exec.ctx(&mut w, child_key(variation.seed(), START_BRANCH));
        for (i, a) in scene.start_args.iter().enumerate() {
            locals[i] = scene.eval(a, &[], &mut ctx)?;
        }
        let it = ctx.iterations;
        exec.account(&mut w, it);
    }
    let frame = Frame { t: Transform2D::IDENTITY, color: HsvColor::BLACK };
    exec.block(&mut w, &start.body, &mut locals, &frame, variation.seed())
        .map_err(|e| e.in_shape(&start.name, scene.start_span))?;

    exec.flush(&mut w);
    let mut primitives = w.out;
    for (i, p) in primitives.iter_mut().enumerate() {
        p.index = i as u64;
    }
    Ok(Evaluation { primitives, iterations: exec.iterations.load(Ordering::Relaxed), draws: w.draws })
}

#[derive(Clone, Copy)]
struct Frame {
    t: Transform2D,
    color: HsvColor,
}

struct Worker {
    out: Vec<Primitive>,
    draws: Vec<RandDraw>,
    unflushed: u64,
    shape_depth: u32,
    in_parallel: bool,
}

impl Worker {
    fn new(in_parallel: bool, shape_depth: u32) -> Self {
        Self { out: Vec::new(), draws: Vec::new(), unflushed: 0, shape_depth, in_parallel }
    }
}

struct Exec<'a> {
    scene: &'a Compiled,
    consts: &'a [f64],
    opts: &'a EvalOptions,
    primitives: AtomicU64,
    iterations: AtomicU64,
}

const FLUSH_EVERY: u64 = 1 << 20;

impl<'a> Exec<'a> {
    fn ctx<'w>(&'w self, w: &'w mut Worker, key: u64) -> Ctx<'w> {
        let used = self.iterations.load(Ordering::Relaxed) + w.unflushed;
        let mut ctx = Ctx::new(self.consts, RandStream::new(key));
        ctx.iteration_budget = self.opts.limits.max_iterations.saturating_sub(used);
        ctx.max_depth = self.opts.limits.max_call_depth;
        ctx.escape = self.opts.escape;
        if self.opts.record_draws {
            ctx.draws = Some(&mut w.draws);
        }
        ctx
    }

    fn account(&self, w: &mut Worker, iterations: u64) {
        w.unflushed += iterations;
        if w.unflushed >= FLUSH_EVERY {
            self.flush(w);
        }
    }

    fn flush(&self, w: &mut Worker) {
        self.iterations.fetch_add(w.unflushed, Ordering::Relaxed);
        w.unflushed = 0;
    }

    fn emit(&self, w: &mut Worker, p: Primitive, span: Span) -> Result<(), EvalError> {
        let n = self.primitives.fetch_add(1, Ordering::Relaxed) + 1;
        if n > self.opts.limits.max_primitives {
            return Err(EvalError::limit(
                span,
                format!("primitive cap of {} exceeded", self.opts.limits.max_primitives),
            ));
        }
        w.out.push(p);
        Ok(())
    }

    /// Evaluates one expression in its own statement context.
    fn scalar(&self, w: &mut Worker, key: u64, ir: &Ir, locals: &[f64]) -> Result<f64, EvalError> {
        let mut ctx = self.ctx(w, key);
        let r = self.scene.eval(ir, locals, &mut ctx);
        let it = ctx.iterations;
        self.account(w, it);
        r
    }

    fn adjustments(&self, adjust: &[AdjIr], locals: &[f64], ctx: &mut Ctx) -> Result<Vec<Adjustment>, EvalError> {
        let mut out = Vec::with_capacity(adjust.len());
        for a in adjust {
            let v0 = self.scene.eval(&a.values[0], locals, ctx)?;
            let v1 = match a.values.get(1) {
                Some(e) => Some(self.scene.eval(e, locals, ctx)?),
                None => None,
            };
            out.push(match a.kind {
                AdjustKind::X => Adjustment::Translate(v0, v1.unwrap_or(0.0)),
                AdjustKind::Y => Adjustment::Translate(0.0, v0),
                AdjustKind::Rotate => Adjustment::Rotate(v0),
                AdjustKind::Size => Adjustment::Scale(v0, v1.unwrap_or(v0)),
                AdjustKind::Hue => Adjustment::Hue(v0),
                AdjustKind::Saturation => Adjustment::Saturation(v0),
                AdjustKind::Brightness => Adjustment::Brightness(v0),
            });
        }
        Ok(out)
    }

    fn eval_all(&self, irs: &[Ir], locals: &[f64], ctx: &mut Ctx) -> Result<Vec<f64>, EvalError> {
        irs.iter().map(|e| self.scene.eval(e, locals, ctx)).collect()
    }

    fn block(&self, w: &mut Worker, body: &[SIr], locals: &mut [f64], frame: &Frame, key: u64) -> Result<(), EvalError> {
        for (idx, stmt) in body.iter().enumerate() {
            let skey = child_key(key, idx as u64);
            match stmt {
                SIr::Bind { slot, value } => {
                    locals[*slot as usize] = self.scalar(w, skey, value, locals)?;
                }
                SIr::Prim { kind, adjust } => {
                    let (adjs, _) = self.statement_adjust(w, skey, adjust, &[], locals)?;
                    let (t, color) = compose_adjustments(&frame.t, frame.color, &adjs);
                    match kind {
                        PrimKind::Square => {
                            let det = t.det();
                            if det != 0.0 && det.is_finite() && t.is_finite() {
                                self.emit(w, Primitive { kind: *kind, transform: t, color, index: 0 }, Span::default())?;
                            }
                        }
                        PrimKind::Fill => {
                            let p = Primitive { kind: *kind, transform: Transform2D::IDENTITY, color, index: 0 };
                            self.emit(w, p, Span::default())?;
                        }
                    }
                }
                SIr::Call { shape, args, adjust, span } => {
                    let (adjs, args) = self.statement_adjust(w, skey, adjust, args, locals)?;
                    let (t, color) = compose_adjustments(&frame.t, frame.color, &adjs);
                    let callee = &self.scene.shapes[*shape as usize];
                    if w.shape_depth >= self.opts.limits.max_call_depth {
                        return Err(EvalError::limit(
                            *span,
                            format!("shape nesting exceeds {} levels", self.opts.limits.max_call_depth),
                        ));
                    }
                    let mut callee_locals = vec![0.0; callee.slots];
                    callee_locals[..args.len()].copy_from_slice(&args);
                    w.shape_depth += 1;
                    let r = stacker::maybe_grow(128 * 1024, 4 * 1024 * 1024, || {
                        self.block(w, &callee.body, &mut callee_locals, &Frame { t, color }, skey)
                    });
                    w.shape_depth -= 1;
                    r.map_err(|e| e.in_shape(&callee.name, *span))?;
                }
                SIr::If { cond, then_body, else_body } => {
                    if self.scalar(w, skey, cond, locals)? != 0.0 {
                        self.block(w, then_body, locals, frame, child_key(skey, 0))?;
                    } else {
                        self.block(w, else_body, locals, frame, child_key(skey, 1))?;
                    }
                }
                SIr::Loop { var, count, adjust, body, span } => {
                    let n = loop_count(self.scalar(w, skey, count, locals)?, *span)?;
                    let (adjs, _) = self.statement_adjust(w, skey, adjust, &[], locals)?;
                    if self.opts.parallel && !w.in_parallel && adjs.is_empty() && n > 1 && rayon::current_num_threads() > 1 {
                        self.parallel_loop(w, n, *var, body, locals, frame, skey)?;
                    } else {
                        let mut cur = *frame;
                        for k in 0..n {
                            if let Some(v) = var {
                                locals[*v as usize] = k as f64;
                            }
                            self.block(w, body, locals, &cur, child_key(skey, k))?;
                            if !adjs.is_empty() {
                                let (t, color) = compose_adjustments(&cur.t, cur.color, &adjs);
                                cur = Frame { t, color };
                            }
                        }
                    }
                }
            }
        }
        Ok(())
    }

    /// Adjustment values and call arguments share the statement's stream,
    /// arguments first.
    fn statement_adjust(
        &self,
        w: &mut Worker,
        key: u64,
        adjust: &[AdjIr],
        args: &[Ir],
        locals: &[f64],
    ) -> Result<(Vec<Adjustment>, Vec<f64>), EvalError> {
        if adjust.is_empty() && args.is_empty() {
            return Ok((Vec::new(), Vec::new()));
        }
        let mut ctx = self.ctx(w, key);
        let r = (|| {
            let a = self.eval_all(args, locals, &mut ctx)?;
            Ok((self.adjustments(adjust, locals, &mut ctx)?, a))
        })();
        let it = ctx.iterations;
        self.account(w, it);
        r
    }

    #[allow(clippy::too_many_arguments)]
    fn parallel_loop(
        &self,
        w: &mut Worker,
        n: u64,
        var: Option<u32>,
        body: &[SIr],
        locals: &[f64],
        frame: &Frame,
        key: u64,
    ) -> Result<(), EvalError> {
        self.flush(w);
        let depth = w.shape_depth;
        let parts: Vec<Result<Worker, EvalError>> = (0..n)
            .into_par_iter()
            .map(|k| {
                let mut sub = Worker::new(true, depth);
                let mut l = locals.to_vec();
                if let Some(v) = var {
                    l[v as usize] = k as f64;
                }
                self.block(&mut sub, body, &mut l, frame, child_key(key, k))?;
                self.flush(&mut sub);
                Ok(sub)
            })
            .collect();
        for part in parts {
            let part = part?;
            w.out.extend_from_slice(&part.out);
            w.draws.extend_from_slice(&part.draws);
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scene::load;

    fn run(src: &str) -> Result<Evaluation, SceneError> {
        evaluate_scene(&load(src).unwrap().1, &VariationSeed::default())
    }

    #[test]
    fn empty_start_shape() {
        assert!(run("startshape s shape s {}").unwrap().primitives.is_empty());
    }

    #[test]
    fn grid_count_and_size() {
        let ev = run("startshape g N = 7 W = 0.25
            shape g { loop i = N [] { loop j = N [] { SQUARE[x j y i size W W] } } }")
        .unwrap();
        assert_eq!(ev.primitives.len(), 49);
        for (k, p) in ev.primitives.iter().enumerate() {
            assert_eq!(p.index, k as u64);
            assert_eq!((p.transform.a, p.transform.d), (0.25, 0.25));
            assert_eq!(p.center(), ((k % 7) as f64, (k / 7) as f64));
        }
    }

    #[test]
    fn calls_compose_frames_and_colors() {
        let ev = run("startshape a shape a { b()[x 3 r 90 h 10] } shape b { SQUARE[x 1 b 0.5] }").unwrap();
        let p = ev.primitives[0];
        assert_eq!(p.center(), (3.0, 1.0));
        assert_eq!((p.color.hue(), p.color.brightness()), (10.0, 0.5));
    }

    #[test]
    fn fill_is_colour_only() {
        let ev = run("startshape a shape a { FILL[h 214 sat 0.89 b 0.95 x 5] SQUARE[] }").unwrap();
        assert_eq!(ev.primitives[0].kind, PrimKind::Fill);
        assert_eq!(ev.primitives[0].transform, Transform2D::IDENTITY);
        assert_eq!(ev.primitives[0].color, HsvColor::new(214.0, 0.89, 0.95));
    }

    #[test]
    fn loop_adjustments_accumulate() {
        let ev = run("startshape a shape a { loop 4 [x 1 b 0.5] { SQUARE[] } }").unwrap();
        let xs: Vec<f64> = ev.primitives.iter().map(|p| p.center().0).collect();
        assert_eq!(xs, vec![0.0, 1.0, 2.0, 3.0]);
        let bs: Vec<f64> = ev.primitives.iter().map(|p| p.color.brightness()).collect();
        assert_eq!(bs, vec![0.0, 0.5, 0.75, 0.875]);
    }

    #[test]
    fn degenerate_squares_are_dropped() {
        assert!(run("startshape a shape a { SQUARE[size 0] }").unwrap().primitives.is_empty());
    }

    #[test]
    fn primitive_cap() {
        let scene = load("startshape a shape a { SQUARE[] a()[x 1] }").unwrap().1;
        let mut opts = EvalOptions::default();
        opts.limits.max_primitives = 1000;
        let err = evaluate_scene_with(&scene, &VariationSeed::default(), &opts).unwrap_err();
        let SceneError::Eval(e) = err else { panic!() };
        assert!(e.message.contains("primitive cap"));
        assert!(e.trace.len() > 10);
    }

    #[test]
    fn iteration_cap() {
        let scene = load("startshape a f(n) = if(n > 0, f(n - 1), 0) shape a { loop 10 [] { v = f(1000) } }")
            .unwrap()
            .1;
        let mut opts = EvalOptions::default();
        opts.limits.max_iterations = 5000;
        let err = evaluate_scene_with(&scene, &VariationSeed::default(), &opts).unwrap_err();
        assert!(err.message().contains("escape-iteration cap"), "{err}");
        opts.limits.max_iterations = 10_010;
        assert_eq!(evaluate_scene_with(&scene, &VariationSeed::default(), &opts).unwrap().iterations, 10_010);
    }

    #[test]
    fn errors_carry_the_call_chain() {
        let err = run("startshape a\nshape a {\n  b(0)[]\n}\nshape b(d) {\n  SQUARE[x 1 / d]\n}").unwrap_err();
        assert_eq!(err.message(), "division by zero");
        assert_eq!((err.span().line, err.span().col), (6, 14));
        let SceneError::Eval(e) = err else { panic!() };
        assert_eq!(e.trace[0], "in shape 'b' called at 3:3");
    }

    #[test]
    fn negative_loop_count() {
        assert!(run("startshape a shape a { loop -1 [] {} }").unwrap_err().message().contains("loop count"));
    }

    #[test]
    fn variation_changes_draws_only() {
        let scene = load("startshape a shape a { loop 50 [] { SQUARE[x rand(0, 1)] } }").unwrap().1;
        let a = evaluate_scene(&scene, &VariationSeed::new("AAAA")).unwrap();
        let b = evaluate_scene(&scene, &VariationSeed::new("AAAA")).unwrap();
        let c = evaluate_scene(&scene, &VariationSeed::new("AAAB")).unwrap();
        assert_eq!(a.primitives, b.primitives);
        assert_ne!(a.primitives, c.primitives);
        assert_eq!(a.primitives.len(), c.primitives.len());
    }

    #[test]
    fn parallel_matches_sequential() {
        let src = "startshape a
            N = 20
            f(n, acc) = if(n > 0, f(n - 1, acc + rand(0, 1)), acc)
            shape a { loop i = N [] { loop j = N [] { v = f(j, 0) if (v > j / 2) { SQUARE[x i y j b v / N] } else { b2(v)[y i] } } } }
            shape b2(v) { SQUARE[x v r 45 h rand(0, 360)] }";
        let scene = load(src).unwrap().1;
        let mut opts = EvalOptions { record_draws: true, ..EvalOptions::default() };
        let pool = rayon::ThreadPoolBuilder::new().num_threads(4).build().unwrap();
        let par = pool.install(|| evaluate_scene_with(&scene, &VariationSeed::new("P"), &opts)).unwrap();
        opts.parallel = false;
        let seq = evaluate_scene_with(&scene, &VariationSeed::new("P"), &opts).unwrap();
        assert_eq!(par.primitives, seq.primitives);
        assert_eq!(par.draws, seq.draws);
        assert_eq!(par.iterations, seq.iterations);
    }

    #[test]
    fn native_and_interpreted_escape_agree() {
        let src = "startshape julia(-0.381966, 0.618034)
            MAXSTEPS = 40
            steps(numSteps, z_r, z_i, c_r, c_i) =
              if((numSteps < MAXSTEPS) && (z_r*z_r+z_i*z_i<4),
                steps(numSteps+1, z_r*z_r - z_i*z_i + c_r, 2*z_r*z_i + c_i, c_r, c_i),
                numSteps)
            LIMIT = 40
            shape julia(c_r, c_i) {
              loop i = LIMIT [] { z_i = 2.8*i/(LIMIT-1) - 1.4
                loop j = LIMIT [] { z_r = 2.8*j/(LIMIT-1) - 1.4
                  n = steps(0, z_r, z_i, c_r, c_i)
                  SQUARE[x z_r y z_i b n / MAXSTEPS] } } }";
        let scene = load(src).unwrap().1;
        let native = evaluate_scene(&scene, &VariationSeed::default()).unwrap();
        let opts = EvalOptions { escape: EscapePath::Interpreted, ..EvalOptions::default() };
        let interp = evaluate_scene_with(&scene, &VariationSeed::default(), &opts).unwrap();
        assert_eq!(native.primitives, interp.primitives);
        assert_eq!(native.iterations, interp.iterations);
    }
}
