//! Acceptance battery. Every criterion prints one PASS/FAIL line with its
//! runtime. Criteria listed in `KNOWN_FAILURES` are reported but do not fail
//! the test run; any other failure does.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use ncpoisson::commpoly::{self, CommPoly};
use ncpoisson::elliptic::{
    abelianize, abelianize_bivector, antisymmetric_repair, build_r_tensor, c_coeffs, contfrac_check,
    example_fixture, gcd, grid_antisymmetry_defect, jac2_certificate, match_family, match_fixture,
    q_commutative, r_tensor_from_c, CommBracket, EllipticParams,
};
use ncpoisson::freealg::{NcPoly, Tensor, TracePoly, Word};
use ncpoisson::matrep::{bracket_value, bracket_value_matrix, jacobi_matrix_test, MatPoint};
use ncpoisson::nccalc::{affine_partials, cyclic_diff, cyclic_gradient, double_diff, Chart};
use ncpoisson::projective::{descend, homogeneous_triples, jacobi_affine, jacobi_homogeneous, path_defect};
use ncpoisson::sample;
use ncpoisson::theta::{theta_selftest, ThetaCtx};
use ncpoisson::Complex64;

/// Criteria that cannot hold as stated; the reasons are printed with the
/// result and recorded in the decisions ledger.
const KNOWN_FAILURES: &[u32] = &[9, 10];

struct Outcome {
    pass: bool,
    detail: String,
    notes: Vec<String>,
}

impl Outcome {
    fn new(pass: bool, detail: impl Into<String>) -> Outcome {
        Outcome {
            pass,
            detail: detail.into(),
            notes: Vec::new(),
        }
    }

    fn note(mut self, line: impl Into<String>) -> Outcome {
        self.notes.push(line.into());
        self
    }
}

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

fn taus() -> [Complex64; 2] {
    [Complex64::new(0.0, 1.0), Complex64::new(0.3, 1.1)]
}

fn tau() -> Complex64 {
    Complex64::new(0.3, 1.1)
}

fn params(n: usize, k: usize) -> EllipticParams {
    EllipticParams::new(n, k, tau()).expect("valid parameters")
}

const CERTIFICATE_PAIRS: [(usize, usize); 8] = [(3, 1), (3, 2), (4, 1), (4, 3), (5, 1), (5, 2), (5, 3), (5, 4)];

fn poly(words: &[&[usize]]) -> NcPoly {
    words.iter().map(|w| (Word::gens(w), c(1.0))).collect()
}

fn criterion_1() -> Outcome {
    // f = tr(x0^2 x1 x0 x1)
    let f = TracePoly::of_gens(&[0, 0, 1, 0, 1]);
    let d0 = cyclic_diff(&f, 0, 2).unwrap();
    let d1 = cyclic_diff(&f, 1, 2).unwrap();
    let ok0 = d0 == poly(&[&[0, 1, 0, 1], &[1, 0, 1, 0], &[1, 0, 0, 1]]);
    let ok1 = d1 == poly(&[&[0, 1, 0, 0], &[0, 0, 1, 0]]);
    Outcome::new(ok0 && ok1, format!("df/dx0 = {}, df/dx1 = {}", d0.render("x"), d1.render("x")))
}

fn criterion_2() -> Outcome {
    let f = NcPoly::monomial(Word::gens(&[0, 0, 1, 0, 1]));
    let d0 = double_diff(&f, 0, 2).unwrap();
    let d1 = double_diff(&f, 1, 2).unwrap();
    let t = |l: &[usize], r: &[usize]| ((Word::gens(l), Word::gens(r)), c(1.0));
    let e0: Tensor = [t(&[], &[0, 1, 0, 1]), t(&[0], &[1, 0, 1]), t(&[0, 0, 1], &[1])]
        .into_iter()
        .collect();
    let e1: Tensor = [t(&[0, 0], &[0, 1]), t(&[0, 0, 1, 0], &[])].into_iter().collect();
    Outcome::new(
        d0 == e0 && d1 == e1,
        format!("Df/Dx0 = {}, Df/Dx1 = {}", d0.render("x"), d1.render("x")),
    )
}

fn criterion_3() -> Outcome {
    let mut rng = sample::rng(3);
    let mut failures = 0;
    for s in 0..200 {
        let n = 2 + s % 3;
        let f = sample::random_trace_poly(&mut rng, n, 8, 6, false);
        let g = cyclic_gradient(&f, n);
        let commutator = &g.left_euler() - &g.right_euler();
        if !commutator.is_zero() {
            failures += 1;
        }
    }
    Outcome::new(failures == 0, format!("{failures} of 200 polynomials violate sum [x_i, df/dx_i] = 0"))
}

fn criterion_4() -> Outcome {
    let mut rng = sample::rng(4);
    let (mut euler_fail, mut chain_fail) = (0, 0);
    for s in 0..100 {
        let n = 2 + s % 3;
        let chart = Chart::standard(n).unwrap();
        let f = sample::random_trace_poly(&mut rng, n - 1, 4, 4, true);
        let fx = chart.expand_trace(&f).unwrap();
        let direct = cyclic_gradient(&fx, n);
        if !direct.left_euler().is_zero() || !direct.right_euler().is_zero() {
            euler_fail += 1;
        }
        if affine_partials(&f, &chart).unwrap() != direct {
            chain_fail += 1;
        }
    }
    Outcome::new(
        euler_fail == 0 && chain_fail == 0,
        format!("Euler violations {euler_fail}/100, chain-rule mismatches {chain_fail}/100"),
    )
}

fn criterion_5() -> Outcome {
    let named = ["char_period_1", "char_period_tau", "char_parity", "rho_three_point", "char_bilinear", "char_bilinear_diagonal"];
    let mut pass = true;
    let mut worst: f64 = 0.0;
    let mut notes = Vec::new();
    for n in [3, 4, 5] {
        for tau in taus() {
            let ctx = ThetaCtx::new(tau, n).unwrap();
            let report = theta_selftest(&ctx, 20, 5).unwrap();
            for id in named {
                let r = report.get(id).expect("identity present");
                worst = worst.max(r);
                pass &= r < 1e-8;
            }
            pass &= report.passed();
            let failing: Vec<String> = report
                .residuals
                .iter()
                .filter(|r| !r.pass)
                .map(|r| format!("{} {:.2e} (tol {:.0e})", r.identity, r.residual, r.tolerance))
                .collect();
            notes.push(format!(
                "n={n} tau={tau}: max named residual {:.2e}, other identities failing: {failing:?}",
                named.iter().map(|id| report.get(id).unwrap()).fold(0.0, f64::max),
            ));
        }
    }
    let mut out = Outcome::new(pass, format!("max residual of theta identities {worst:.2e} (tol 1e-8)"));
    out.notes = notes;
    out
}

fn criterion_6() -> Outcome {
    let mut worst: f64 = 0.0;
    for tau in taus() {
        for (n, k) in CERTIFICATE_PAIRS {
            let p = EllipticParams::new(n, k, tau).unwrap();
            worst = worst.max(c_coeffs(&p).unwrap().antisymmetry_defect());
        }
    }
    Outcome::new(worst < 1e-10, format!("max |c[-i][-r] + c[i][r]| = {worst:.2e} over 16 parameter sets"))
}

fn criterion_7() -> Outcome {
    let mut pass = true;
    let mut notes = Vec::new();
    let (mut worst, mut weakest_control) = (0.0f64, f64::INFINITY);
    for (n, k) in CERTIFICATE_PAIRS {
        let coeffs = c_coeffs(&params(n, k)).unwrap();
        let cert = jac2_certificate(&coeffs);
        let control = jac2_certificate(&coeffs.perturbed(1, 1, c(0.5)));
        worst = worst.max(cert.residual);
        weakest_control = weakest_control.min(control.residual);
        pass &= cert.residual < 1e-8 && control.residual > 1e-3;
        notes.push(format!(
            "({n},{k}): residual {:.2e}, perturbed control {:.2e}",
            cert.residual, control.residual
        ));
    }
    let mut out = Outcome::new(
        pass,
        format!("max certificate residual {worst:.2e} (tol 1e-8), min control residual {weakest_control:.2e} (> 1e-3)"),
    );
    out.notes = notes;
    out
}

fn criterion_8() -> Outcome {
    let mut pass = true;
    let mut notes = Vec::new();
    for (n, k) in [(3, 1), (3, 2), (4, 1)] {
        let r = build_r_tensor(&params(n, k)).unwrap();
        let b = descend(&r).unwrap();
        let chart = jacobi_affine(&b, 3, 0);
        let triples = homogeneous_triples(&b.chart(), 3).unwrap();
        let homog = jacobi_homogeneous(&r, &triples);
        let mut rng = sample::rng(8);
        let mut path: f64 = 0.0;
        for _ in 0..10 {
            let mut pick = || sample::random_trace_monomial(&mut rng, n - 1, 1, 3);
            let (f, g, h) = (pick(), pick(), pick());
            path = path.max(path_defect(&b, &r, &f, &g, &h).unwrap());
        }
        pass &= chart.max_residual < 1e-9 && homog.max_residual < 1e-9 && path < 1e-9;
        notes.push(format!(
            "({n},{k}): chart {:.2e} over {} triples (scale {:.1e}), homogeneous {:.2e} over {} triples, path gap {:.2e}",
            chart.max_residual, chart.triples_checked, chart.scale, homog.max_residual, homog.triples_checked, path
        ));
    }
    let mut out = Outcome::new(pass, "chart Jacobiator at D = 3 and homogeneous path below 1e-9");
    out.notes = notes;
    out
}

fn cubic_monomials(n: usize) -> Vec<CommPoly> {
    let mut out = Vec::new();
    for a in 0..n {
        for b in a..n {
            for d in b..n {
                out.push(CommPoly::term(commpoly::monomial(n, &[a, b, d]), c(1.0)));
            }
        }
    }
    out
}

fn cubic_jacobi(q: &CommBracket) -> f64 {
    let monos = cubic_monomials(q.n());
    let scale = q.max_abs().max(1.0);
    let mut worst: f64 = 0.0;
    for (i, f) in monos.iter().enumerate().step_by(2) {
        for g in monos.iter().skip(i + 1).step_by(3) {
            for h in monos.iter().skip(i + 2).step_by(5) {
                worst = worst.max(q.jacobiator(f, g, h).max_abs() / (scale * scale));
            }
        }
    }
    worst
}

fn criterion_9() -> Outcome {
    let mut pass = true;
    let mut notes = Vec::new();
    for (n, k) in [(3, 1), (4, 3), (5, 2)] {
        let p = params(n, k);
        let ab = abelianize(&build_r_tensor(&p).unwrap());
        let q = q_commutative(&p).unwrap();
        let dist = ab.distance(&q);
        let flipped = ab.distance(&q.scaled(c(-1.0)));
        pass &= dist < 1e-10;
        notes.push(format!(
            "({n},{k}): |abelianized - q| = {dist:.2e}, |abelianized + q| = {flipped:.2e}, |q| = {:.2e}",
            q.max_abs()
        ));
    }
    for n in [3, 4, 5] {
        let p = params(n, n - 1);
        let q = q_commutative(&p).unwrap();
        let r = build_r_tensor(&p).unwrap();
        let vanish = q.max_abs() < 1e-10 && r.max_abs() > 1e-3;
        pass &= vanish;
        notes.push(format!(
            "({n},{}): |q| = {:.2e}, |r| = {:.2e}, commutative bracket vanishes while tensor does not: {vanish}",
            n - 1,
            q.max_abs(),
            r.max_abs()
        ));
    }
    for (n, k) in [(3, 1), (4, 1), (5, 2)] {
        let q = q_commutative(&params(n, k)).unwrap();
        let jac = cubic_jacobi(&q);
        pass &= jac < 1e-8;
        notes.push(format!("({n},{k}): commutative Jacobi at cubic degree {jac:.2e}"));
    }
    let mut out = Outcome::new(pass, "abelianization equals q coefficientwise; k = n-1 vanishing; cubic Jacobi");
    out.notes = notes;
    out.note("abelianizing the nonabelian formula gives sum_r c(i-j,r) x(i-r) x(j+r); substituting r -> -r and using c(-a,-r) = -c(a,r) turns this into minus the commutative formula, so the two agree only up to a global sign")
}

fn criterion_10() -> Outcome {
    let mut pass = true;
    let mut notes = Vec::new();
    for k in [1, 2] {
        let b = descend(&build_r_tensor(&params(3, k)).unwrap()).unwrap();
        let m = match_fixture(&b, k).unwrap();
        let ok = m.equiv.max_defect < 1e-9;
        pass &= ok;
        notes.push(format!(
            "k={k}: lambda = {:.6}, t* = {:.6}, fit misfit {:.2e}, defect at degree 4 {:.2e} over {} pairs",
            m.lambda, m.t, m.fit_residual, m.equiv.max_defect, m.equiv.pairs_checked
        ));
    }
    let t = Complex64::new(0.4, -0.3);
    let literal = example_fixture(2, t).unwrap();
    notes.push(format!(
        "k=2 literal grid: term-by-term antisymmetry defect {:.2e}, Jacobi residual at D = 3 {:.2e}",
        grid_antisymmetry_defect(literal.bivector()),
        jacobi_affine(&literal, 3, 0).max_residual
    ));
    let b = descend(&build_r_tensor(&params(3, 2)).unwrap()).unwrap();
    let repaired = match_family(&b, |t| antisymmetric_repair(&example_fixture(2, t)?)).unwrap();
    let rep_jac = jacobi_affine(&antisymmetric_repair(&example_fixture(2, repaired.t).unwrap()).unwrap(), 3, 0);
    notes.push(format!(
        "diagnostic only: with Theta(2,1) rebuilt as -Theta(1,2)* the k=2 grid matches with defect {:.2e} (lambda = {:.6}, t* = {:.6}) and Jacobi residual {:.2e}",
        repaired.equiv.max_defect, repaired.lambda, repaired.t, rep_jac.max_residual
    ));
    let mut out = Outcome::new(pass, "descended elliptic brackets match the literal n = 3 grids");
    out.notes = notes;
    out
}

fn criterion_11() -> Outcome {
    let mut pass = true;
    let mut notes = Vec::new();
    for (n, k) in [(3, 1), (4, 1)] {
        let b = descend(&build_r_tensor(&params(n, k)).unwrap()).unwrap();
        for size in [2, 3] {
            let rep = jacobi_matrix_test(&b, size, 100, 3, 11).unwrap();
            pass &= rep.max_residual < 1e-8;
            notes.push(format!("({n},{k}) N={size}: max relative Jacobiator {:.2e} over 100 points", rep.max_residual));
        }
        let coeffs = c_coeffs(&params(n, k)).unwrap().perturbed(1, 1, c(0.5));
        let perturbed = descend(&r_tensor_from_c(&coeffs)).unwrap();
        let control = jacobi_matrix_test(&perturbed, 2, 100, 3, 11).unwrap();
        pass &= control.max_residual > 1e-3;
        notes.push(format!("({n},{k}) perturbed control N=2: {:.2e}", control.max_residual));
    }

    // N = 1 against commutative evaluations, (3,1) in the chart x2 = 1
    let r = build_r_tensor(&params(3, 1)).unwrap();
    let b = descend(&r).unwrap();
    let hom = abelianize(&r);
    let chart_comm = abelianize_bivector(b.bivector()).unwrap();
    let x = |i| commpoly::var(3, i);
    let (u0, u1) = (TracePoly::of_gens(&[0]), TracePoly::of_gens(&[1]));
    let mut rng = sample::rng(111);
    let (mut quotient_gap, mut chart_gap, mut dual_gap): (f64, f64, f64) = (0.0, 0.0, 0.0);
    let mut rows = Vec::new();
    for _ in 0..30 {
        let pt = MatPoint::random(&mut rng, 2, 1);
        let (a, bb) = (pt.mats()[0][(0, 0)], pt.mats()[1][(0, 0)]);
        let v = bracket_value(&b, &u0, &u1, &pt).unwrap();
        // {x0/x2, x1/x2} at x2 = 1
        let xs = [a, bb, c(1.0)];
        let e = |f: &CommPoly| commpoly::eval(f, &xs);
        let want = e(&hom.eval(&x(0), &x(1))) - bb * e(&hom.eval(&x(0), &x(2))) - a * e(&hom.eval(&x(2), &x(1)));
        quotient_gap = quotient_gap.max((v - want).norm() / want.norm().max(1.0));

        let f = sample::random_trace_monomial(&mut rng, 2, 1, 3);
        let g = sample::random_trace_monomial(&mut rng, 2, 1, 3);
        let sym = bracket_value(&b, &f, &g, &pt).unwrap();
        let mat = bracket_value_matrix(b.bivector(), &f, &g, &pt).unwrap();
        let comm = |p: &TracePoly| -> CommPoly {
            p.iter()
                .map(|(w, coeff)| {
                    let vars: Vec<usize> = w.rep().letters().iter().map(|l| l.generator().unwrap()).collect();
                    (commpoly::monomial(2, &vars), *coeff)
                })
                .collect()
        };
        let cv = commpoly::eval(&chart_comm.eval(&comm(&f), &comm(&g)), &[a, bb]);
        chart_gap = chart_gap.max((sym - cv).norm() / cv.norm().max(1.0));
        dual_gap = dual_gap.max((sym - mat).norm() / sym.norm().max(1.0));
        rows.push((a, bb, v));
    }
    // fit {u0,u1} = lambda (u0^3 + u1^3 + 1) + mu u0 u1 on the first half, test on the rest
    let design = |a: Complex64, b: Complex64| [a * a * a + b * b * b + 1.0, a * b];
    let mat = nalgebra::DMatrix::from_fn(15, 2, |i, j| design(rows[i].0, rows[i].1)[j]);
    let rhs = nalgebra::DVector::from_iterator(15, rows[..15].iter().map(|r| r.2));
    let sol = mat.svd(true, true).solve(&rhs, 1e-14).unwrap();
    let pattern_gap = rows[15..]
        .iter()
        .map(|&(a, b, v)| {
            let d = design(a, b);
            (sol[0] * d[0] + sol[1] * d[1] - v).norm() / v.norm().max(1.0)
        })
        .fold(0.0, f64::max);
    let t_cubic = sol[1] / (3.0 * sol[0]);
    pass &= quotient_gap < 1e-10 && chart_gap < 1e-10 && dual_gap < 1e-9 && pattern_gap < 1e-10;
    notes.push(format!(
        "N=1 (3,1): quotient-rule gap {quotient_gap:.2e}, commutative chart gap {chart_gap:.2e}, symbolic vs matrix path {dual_gap:.2e}"
    ));
    notes.push(format!(
        "N=1 (3,1): {{u0,u1}} = lambda (u0^3 + u1^3 + 3 t u0 u1 + 1) with lambda = {:.6}, t = {t_cubic:.6}, held-out gap {pattern_gap:.2e}",
        sol[0]
    ));
    let mut out = Outcome::new(pass, "matrix Jacobi below 1e-8 for N = 2, 3; N = 1 agrees with commutative evaluation");
    out.notes = notes;
    out
}

fn criterion_12() -> Outcome {
    let mut checked = 0;
    let mut failed = Vec::new();
    for n in 2..=12u64 {
        for k in 1..n {
            if gcd(n, k) != 1 {
                continue;
            }
            checked += 1;
            let check = contfrac_check(n, k).unwrap();
            if !check.pass {
                failed.push((n, k));
            }
        }
    }
    Outcome::new(failed.is_empty(), format!("{checked} coprime pairs, failures {failed:?}"))
}

fn main() -> ExitCode {
    type Criterion = (u32, &'static str, fn() -> Outcome, Option<Duration>);
    let criteria: Vec<Criterion> = vec![
        (1, "cyclic partials of tr(x0^2 x1 x0 x1)", criterion_1, Some(Duration::from_millis(1))),
        (2, "double derivatives of x0^2 x1 x0 x1", criterion_2, Some(Duration::from_millis(1))),
        (3, "sum of commutators with cyclic partials vanishes", criterion_3, None),
        (4, "Euler identities and chain rule", criterion_4, None),
        (5, "theta identities", criterion_5, Some(Duration::from_secs(5))),
        (6, "coefficient antisymmetry", criterion_6, None),
        (7, "index-equation certificate", criterion_7, Some(Duration::from_secs(60))),
        (8, "chart-level Jacobi identity", criterion_8, Some(Duration::from_secs(300))),
        (9, "abelianization", criterion_9, None),
        (10, "n = 3 fixture match", criterion_10, None),
        (11, "matrix representations", criterion_11, None),
        (12, "continued fractions", criterion_12, None),
    ];
    let mut unexpected = Vec::new();
    for (id, name, run, budget) in criteria {
        let start = Instant::now();
        let out = run();
        let elapsed = start.elapsed();
        let in_budget = budget.is_none_or(|b| elapsed <= b);
        let pass = out.pass && in_budget;
        let budget_note = match budget {
            Some(b) if !in_budget => format!(", over budget {b:?}"),
            _ => String::new(),
        };
        println!(
            "{} [{id:2}] {name}: {} ({elapsed:.2?}{budget_note})",
            if pass { "PASS" } else { "FAIL" },
            out.detail
        );
        for line in &out.notes {
            println!("        {line}");
        }
        let known = KNOWN_FAILURES.contains(&id);
        if !pass && !known {
            unexpected.push(id);
        }
        if pass && known {
            println!("        note: listed as a known failure but passed");
        }
    }
    if unexpected.is_empty() {
        println!("acceptance: no unexpected failures (known: {KNOWN_FAILURES:?})");
        ExitCode::SUCCESS
    } else {
        println!("acceptance: unexpected failures {unexpected:?}");
        ExitCode::FAILURE
    }
}
