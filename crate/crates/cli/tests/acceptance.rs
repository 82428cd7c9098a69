//! Acceptance suite: one test per release criterion, each printing a
//! PASS line with the measured figure (visible under `--nocapture`).
//!
//! Reference constants (the blow-up abscissa, Γ values, measure moments)
//! were frozen from an independent 60-digit oracle run; nothing here is
//! tuned to the implementation under test.

use lfrac::{
    cdf, estimate_critical_order, gamma_plus_one, integrate_recursive, integrate_riemann,
    integrate_sum, lfd_at, solve, FractalTerm, GbarExpr, HSpec, Interval, ScaleLadder,
    SelfSimilarSet, SeparableProblem, Side, StaircaseEvaluator,
};
use std::path::Path;
use std::time::{Duration, Instant};

const GAMMA_THREE_HALVES: f64 = 0.886_226_925_452_758;
const BLOWUP_ABSCISSA: f64 = 0.966_129_337_327_260_7;

fn unit() -> Interval {
    Interval::new(0.0, 1.0).unwrap()
}

fn middle_third() -> SelfSimilarSet {
    SelfSimilarSet::middle_p(3.0, unit()).unwrap()
}

fn assert_runtime(start: Instant, budget: Duration, label: &str) {
    let elapsed = start.elapsed();
    assert!(
        elapsed <= budget,
        "{label}: runtime {elapsed:?} exceeds {budget:?}"
    );
}

#[test]
fn c01_staircase_normalization() {
    let start = Instant::now();
    let set = middle_third();
    let st = StaircaseEvaluator::new(set.clone()).unwrap();
    let err = (st.gamma_factor() * st.value(1.0) - 1.0).abs();
    assert!(err <= 1e-12, "digit evaluator off by {err}");

    let term = FractalTerm::new(set, GbarExpr::One).unwrap();
    let r = integrate_riemann(&term, (0.0, 1.0), 12).unwrap();
    let p1 = st.value(1.0);
    assert!(
        p1 >= r.lower - 1e-12 && p1 <= r.upper + 1e-12,
        "digit value {p1} outside riemann bracket [{}, {}]",
        r.lower,
        r.upper
    );
    assert_runtime(start, Duration::from_secs(1), "normalization");
    println!("PASS normalization: |Γ(q+1)·P_C(1) − 1| = {err:.2e}, riemann bracket agrees");
}

#[test]
fn c02_cdf_self_similarity() {
    let start = Instant::now();
    let set = middle_third();
    let mut max_err: f64 = 0.0;
    for i in 0..1000 {
        let x = i as f64 / 999.0;
        max_err = max_err.max((cdf(&set, x / 3.0) - cdf(&set, x) / 2.0).abs());
    }
    assert!(max_err <= 1e-12, "max |F(x/3) − F(x)/2| = {max_err}");
    assert_runtime(start, Duration::from_secs(1), "self-similarity");
    println!("PASS self-similarity: max |F(x/3) − F(x)/2| = {max_err:.2e} over 1000 points");
}

#[test]
fn c03_measure_moments() {
    let start = Instant::now();
    let set = middle_third();
    let gamma = gamma_plus_one(set.dimension()).unwrap();
    let tx = FractalTerm::new(set.clone(), GbarExpr::X).unwrap();
    let tx2 = FractalTerm::new(set, GbarExpr::X2).unwrap();

    let m1 = gamma * integrate_recursive(&tx, 20).unwrap().value;
    let m2 = gamma * integrate_recursive(&tx2, 20).unwrap().value;
    let (e1, e2) = ((m1 - 0.5).abs(), (m2 - 0.375).abs());
    assert!(e1 <= 1e-10, "first moment off by {e1}");
    assert!(e2 <= 1e-10, "second moment off by {e2}");

    let r1 = integrate_riemann(&tx, (0.0, 1.0), 12).unwrap();
    assert!(r1.lower <= 0.5 / gamma && 0.5 / gamma <= r1.upper);
    let r2 = integrate_riemann(&tx2, (0.0, 1.0), 12).unwrap();
    assert!(r2.lower <= 0.375 / gamma && 0.375 / gamma <= r2.upper);

    assert_runtime(start, Duration::from_secs(5), "moments");
    println!("PASS moments: Γ·∫x = 0.5 ± {e1:.2e}, Γ·∫x² = 0.375 ± {e2:.2e}, riemann brackets contain both");
}

#[test]
fn c04_exponential_solution() {
    let start = Instant::now();
    let st = StaircaseEvaluator::new(middle_third()).unwrap();
    let mut max_rel: f64 = 0.0;
    for a in [1.0, 2.5] {
        let term = FractalTerm::new(middle_third(), GbarExpr::One).unwrap();
        let problem = SeparableProblem::new(term, HSpec::Linear, 0.0, a).unwrap();
        let sol = solve(problem, 12).unwrap();
        for i in 0..1000 {
            let x = i as f64 / 999.0;
            let want = a * st.value(x).exp();
            let got = sol.value(x).unwrap();
            max_rel = max_rel.max((got - want).abs() / want.abs());
        }
    }
    assert!(max_rel <= 1e-9, "max relative error {max_rel}");
    assert_runtime(start, Duration::from_secs(2), "exponential solution");
    println!("PASS exponential solution: max rel error {max_rel:.2e} at 1000 grid points, A ∈ {{1, 2.5}}");
}

#[test]
fn c05_reciprocal_branch_and_blowup() {
    let st = StaircaseEvaluator::new(middle_third()).unwrap();

    // zero-constant branch: y = −1/P_C(x) on (0, 1]
    let term = FractalTerm::new(middle_third(), GbarExpr::One).unwrap();
    let problem = SeparableProblem::with_constant(term, HSpec::Quadratic, 0.0).unwrap();
    let sol = solve(problem, 12).unwrap();
    let mut max_rel: f64 = 0.0;
    for i in 0..500 {
        let x = 0.05 + (1.0 - 0.05) * i as f64 / 499.0;
        let want = -1.0 / st.value(x);
        let got = sol.value(x).unwrap();
        max_rel = max_rel.max((got - want).abs() / want.abs());
    }
    assert!(max_rel <= 1e-8, "max relative error {max_rel}");

    // blow-up detection for y0 = 1 against the frozen bisection oracle
    let term = FractalTerm::new(middle_third(), GbarExpr::One).unwrap();
    let problem = SeparableProblem::new(term, HSpec::Quadratic, 0.0, 1.0).unwrap();
    let blow = solve(problem, 12).unwrap().blowup().expect("blow-up inside [0,1]");
    let berr = (blow - BLOWUP_ABSCISSA).abs();
    assert!(berr <= 1e-10, "blow-up abscissa off by {berr}");
    println!("PASS reciprocal branch: max rel error {max_rel:.2e} on [0.05, 1]; blow-up abscissa off by {berr:.2e}");
}

#[test]
fn c06_lfd_estimator() {
    let start = Instant::now();

    // exponents of pure power laws
    let ladder = ScaleLadder::new(1e-2, 0.5, 20).unwrap();
    let mut worst_order: f64 = 0.0;
    for beta in [0.3, 0.5, 0.8] {
        let x = 0.4;
        let est = estimate_critical_order(|t| (t - x).abs().powf(beta), x, &ladder, Side::Both)
            .unwrap();
        worst_order = worst_order.max((est.critical_order.unwrap() - beta).abs());
    }
    assert!(worst_order <= 0.02, "worst exponent error {worst_order}");

    // coefficient of t^{1/2} at 0 for q = 1/2
    let est = lfd_at(|t: f64| t.max(0.0).sqrt(), 0.0, 0.5, &ladder, Side::Right).unwrap();
    let coef = est.coefficient.unwrap();
    let cerr = (coef - GAMMA_THREE_HALVES).abs() / GAMMA_THREE_HALVES;
    assert!(cerr <= 0.02, "sqrt coefficient off by {cerr}");

    // smooth functions at q = 0.6: coefficient vanishes at the finest ladder
    let fine = ScaleLadder::new(1.3e-6, 0.5, 8).unwrap();
    type Case = (fn(f64) -> f64, f64);
    let cases: [Case; 3] = [(|t| t * t, 0.3), (|t| t.sin(), 0.3), (|t| t.exp(), 0.0)];
    let mut worst_smooth: f64 = 0.0;
    for (f, x) in cases {
        for side in [Side::Right, Side::Left] {
            let c = lfd_at(f, x, 0.6, &fine, side).unwrap().coefficient.unwrap();
            worst_smooth = worst_smooth.max(c.abs());
        }
    }
    assert!(worst_smooth <= 1e-3, "smooth coefficient {worst_smooth}");

    assert_runtime(start, Duration::from_secs(2), "lfd estimator");
    println!("PASS lfd estimator: exponent ±{worst_order:.3}, sqrt coefficient ±{:.2}%, smooth |coef| ≤ {worst_smooth:.2e}", 100.0 * cerr);
}

#[test]
fn c07_bracket_decay() {
    let set = middle_third();
    let term = FractalTerm::new(set, GbarExpr::X)
        .unwrap()
        .with_lipschitz(1.0)
        .unwrap();
    let widths: Vec<f64> = (6..=14)
        .map(|d| {
            integrate_riemann(&term, (0.0, 1.0), d)
                .unwrap()
                .bracket_width()
        })
        .collect();
    let mut ratios = Vec::new();
    for pair in widths.windows(2) {
        let ratio = pair[1] / pair[0];
        assert!(
            (0.8 / 3.0..=1.2 / 3.0).contains(&ratio),
            "width ratio {ratio} outside [0.8/3, 1.2/3]"
        );
        ratios.push(ratio);
    }
    println!(
        "PASS bracket decay: ratios over depths 6..14 within [{:.4}, {:.4}]",
        ratios.iter().cloned().fold(f64::INFINITY, f64::min),
        ratios.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
    );
}

#[test]
fn c08_superposition_and_linearity() {
    let c1 = middle_third();
    let c2 = SelfSimilarSet::middle_p(3.0, Interval::new(2.0, 3.0).unwrap()).unwrap();
    let gamma = gamma_plus_one(c1.dimension()).unwrap();

    // distinct per-set scalars vs one scalar carried on both covers
    let two_term = integrate_sum(
        &[
            FractalTerm::new(c1.clone(), GbarExpr::One).unwrap(),
            FractalTerm::new(c2.clone(), GbarExpr::Poly(vec![2.0])).unwrap(),
        ],
        None,
        10,
    )
    .unwrap();
    let union_style = integrate_sum(
        &[
            FractalTerm::new(c1.clone(), GbarExpr::Poly(vec![3.0])).unwrap(),
            FractalTerm::new(c2, GbarExpr::Poly(vec![3.0])).unwrap(),
        ],
        None,
        10,
    )
    .unwrap();
    let gap = (two_term.value - union_style.value).abs();
    assert!(gap >= 0.5 / gamma, "separation only {gap}");

    // linearity on pseudo-random coefficient pairs (fixed-seed LCG)
    let t1 = FractalTerm::new(c1.clone(), GbarExpr::X).unwrap();
    let t2 = FractalTerm::new(c1.clone(), GbarExpr::X2).unwrap();
    let i1 = integrate_riemann(&t1, (0.0, 1.0), 10).unwrap().value;
    let i2 = integrate_riemann(&t2, (0.0, 1.0), 10).unwrap().value;
    let mut state: u64 = 0x9e3779b97f4a7c15;
    let mut next = move || {
        state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        ((state >> 11) as f64 / (1u64 << 53) as f64) * 4.0 - 2.0
    };
    let mut worst: f64 = 0.0;
    for _ in 0..10 {
        let (alpha, beta) = (next(), next());
        let combo = FractalTerm::new(c1.clone(), GbarExpr::Poly(vec![0.0, alpha, beta])).unwrap();
        let ic = integrate_riemann(&combo, (0.0, 1.0), 10).unwrap().value;
        worst = worst.max((ic - (alpha * i1 + beta * i2)).abs());
    }
    assert!(worst <= 1e-12, "linearity defect {worst}");
    println!("PASS superposition: non-equivalence gap {gap:.3} ≥ {:.3}; linearity defect ≤ {worst:.2e}", 0.5 / gamma);
}

#[test]
fn c09_gap_constancy() {
    let term = FractalTerm::new(middle_third(), GbarExpr::One).unwrap();
    let problem = SeparableProblem::new(term, HSpec::Linear, 0.0, 1.0).unwrap();
    let sol = solve(problem, 12).unwrap();
    let reference = sol.value(0.5).unwrap();
    for i in 0..100 {
        // interior samples of the central gap (1/3, 2/3)
        let x = 1.0 / 3.0 + 1e-9 + (1.0 / 3.0 - 2e-9) * i as f64 / 99.0;
        let y = sol.value(x).unwrap();
        assert!(y == reference, "x = {x}: {y} != {reference}");
    }
    println!("PASS gap constancy: 100 central-gap samples bitwise equal");
}

#[test]
fn c10_cli_determinism() {
    let base = tempfile::tempdir().unwrap();
    let problem_linear = write_problem(base.path(), "linear", 1.0);
    let problem_blowup = write_problem(base.path(), "quadratic", 1.0);
    let samples = write_power_samples(base.path());

    let scenarios: Vec<Vec<String>> = vec![
        svec(&["set", "--p", "3", "--depth", "4"]),
        svec(&["staircase", "--p", "3", "--grid", "101"]),
        svec(&["integrate", "--gbar", "one", "--p", "3", "--depth", "12"]),
        svec(&["integrate", "--gbar", "x2", "--p", "3", "--depth", "10"]),
        svec(&[
            "integrate", "--gbar", "x", "--p", "3", "--method", "recursive", "--depth", "12",
        ]),
        svec(&["solve", "--problem", problem_linear.to_str().unwrap(), "--grid", "64"]),
        svec(&["solve", "--problem", problem_blowup.to_str().unwrap(), "--grid", "64"]),
        svec(&["lfd", "--input", samples.to_str().unwrap(), "--at", "0.5", "--q", "0.5"]),
    ];

    let mut artifacts = 0usize;
    for (i, args) in scenarios.iter().enumerate() {
        let dir_a = base.path().join(format!("a{i}"));
        let dir_b = base.path().join(format!("b{i}"));
        let out_a = run_cli(&dir_a, args);
        let out_b = run_cli(&dir_b, args);
        assert!(out_a.status.success(), "scenario {i}: {}", String::from_utf8_lossy(&out_a.stderr));
        assert_eq!(out_a.stdout, out_b.stdout, "scenario {i}: stdout differs");
        let mut names: Vec<_> = std::fs::read_dir(&dir_a)
            .unwrap()
            .map(|e| e.unwrap().file_name())
            .collect();
        names.sort();
        assert!(!names.is_empty());
        for name in names {
            let a = std::fs::read(dir_a.join(&name)).unwrap();
            let b = std::fs::read(dir_b.join(&name)).unwrap();
            assert_eq!(a, b, "scenario {i}: {name:?} differs between runs");
            artifacts += 1;
        }
    }
    println!("PASS determinism: {artifacts} artifacts byte-identical across repeated runs");
}

fn svec(args: &[&str]) -> Vec<String> {
    args.iter().map(|s| s.to_string()).collect()
}

fn run_cli(dir: &Path, args: &[String]) -> std::process::Output {
    std::process::Command::new(env!("CARGO_BIN_EXE_lfrac"))
        .arg("--out")
        .arg(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

fn write_problem(dir: &Path, h_kind: &str, y0: f64) -> std::path::PathBuf {
    let doc = lfrac::ProblemDoc {
        set: middle_third(),
        gbar: "one".into(),
        h: lfrac::HDoc {
            kind: h_kind.into(),
            k: None,
        },
        x0: 0.0,
        y0,
        depth: 12,
    };
    let path = dir.join(format!("accept_problem_{h_kind}.json"));
    std::fs::write(&path, doc.to_json_string().unwrap()).unwrap();
    path
}

fn write_power_samples(dir: &Path) -> std::path::PathBuf {
    let n = 4096;
    let mut csv = String::from("x,f\n");
    for i in 0..=n {
        let t = i as f64 / n as f64;
        csv.push_str(&format!("{},{}\n", t, (t - 0.5f64).abs().sqrt()));
    }
    let path = dir.join("accept_samples.csv");
    std::fs::write(&path, csv).unwrap();
    path
}
