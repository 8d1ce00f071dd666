use juliart_core::dynamics::{escape_steps, Complex, EscapeBudget};
use juliart_core::gallery::preset;
use juliart_core::render::{evaluate_scene, RandStream, VariationSeed};
use juliart_core::scene::{load, parse_expression, EscapePath, SceneError};
use proptest::prelude::*;

fn steps_program(max_steps: u32) -> juliart_core::scene::Compiled {
    let src = format!(
        "startshape s shape s {{}}\nMAXSTEPS = {max_steps}\n\
         steps(numSteps,z_r,z_i,c_r,c_i) =\n\
         if((numSteps < MAXSTEPS) && (z_r*z_r+z_i*z_i<4),\n\
         steps(numSteps+1, z_r*z_r - z_i*z_i + c_r, 2*z_r*z_i + c_i, c_r, c_i),\n\
         numSteps)\n"
    );
    load(&src).unwrap().1
}

fn eval(src: &str) -> Result<f64, SceneError> {
    let (_, c) = load("startshape s shape s {}").unwrap();
    c.eval_expr(&parse_expression(src)?, &[], &mut RandStream::new(7), EscapePath::Native)
}

#[test]
fn fixed_point_runs_to_the_budget() {
    let c = steps_program(40);
    for path in [EscapePath::Native, EscapePath::Interpreted] {
        assert_eq!(c.call_function("steps", &[0.0; 5], path).unwrap(), 40.0);
    }
}

#[test]
fn expression_examples() {
    assert_eq!(eval("if(1 < 2, 10, 20)").unwrap(), 10.0);
    assert_eq!(eval("rand(5, 5)").unwrap(), 5.0);
    // the guard keeps the division from running
    assert_eq!(eval("(0 > 1) && (1/0 > 0)").unwrap(), 0.0);
    assert_eq!(eval("if(0, 1/0, 3)").unwrap(), 3.0);
    let err = eval("1 + 1/0").unwrap_err();
    assert_eq!((err.kind(), err.span().line, err.span().col), ("eval", 1, 6));
    assert_eq!(eval("nope + 1").unwrap_err().kind(), "semantic");
}

#[test]
fn preset_programs_load() {
    let (program, c) = load(preset("basic").unwrap().source).unwrap();
    assert_eq!(program.constants().count(), 8);
    assert_eq!(c.start_shape(), "julia");
    let (_, c) = load("startshape s  shape s {}").unwrap();
    assert!(evaluate_scene(&c, &VariationSeed::default()).unwrap().primitives.is_empty());
    let e = load("shape s { SQUARE[x] }").unwrap_err();
    assert_eq!(e.kind(), "syntax");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]
    #[test]
    fn dsl_agrees_with_native(zr in -2.0..2.0f64, zi in -2.0..2.0f64, cr in -2.0..2.0f64, ci in -2.0..2.0f64,
                              n in 1u32..300) {
        let c = steps_program(n);
        let want = escape_steps(Complex::new(zr, zi), Complex::new(cr, ci), EscapeBudget::new(n).unwrap()) as f64;
        let args = [0.0, zr, zi, cr, ci];
        prop_assert_eq!(c.call_function("steps", &args, EscapePath::Interpreted).unwrap(), want);
        prop_assert_eq!(c.call_function("steps", &args, EscapePath::Native).unwrap(), want);
    }
}
