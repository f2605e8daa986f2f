//! Acceptance suite: nine criteria, one line each, nonzero exit on failure.

mod common;

use std::process::ExitCode;
use std::time::Instant;

use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use common::*;
use tops_core::bilinear::{form_direct, form_four_term, form_scale, form_tops, KernelSpec, TruncationWindow};
use tops_core::grid::{BitTail, GridAxis, Interval};
use tops_core::measure::{inner_product, norm_sq};
use tops_core::probe::random_probes;
use tops_core::wavelet::*;
use tops_core::{DyadicCube, DyadicRational, GridSpec, Measure, MomentSystem, PiecewisePolyFn, SuperCube};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

// ---------------------------------------------------------------- grids

fn random_axis(rng: &mut ChaCha8Rng) -> GridAxis {
    let offsets = ["0", "1/2", "3/8", "5/16", "7/8", "1/64"];
    let offset = d(offsets[rng.gen_range(0..offsets.len())]);
    let prefix: Vec<bool> = (0..rng.gen_range(0..4)).map(|_| rng.gen_bool(0.5)).collect();
    let tail = match rng.gen_range(0..4) {
        0 => BitTail::AllZero,
        1 => BitTail::AllOne,
        2 => BitTail::Periodic(vec![true, false]),
        _ => BitTail::Periodic(vec![false, true, true]),
    };
    GridAxis::new(offset, prefix, tail).unwrap()
}

fn fixture_grids() -> Vec<GridSpec> {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut out = vec![GridSpec::standard(1), GridSpec::standard(2), GridSpec::standard(3), shifted(), all_one()];
    for n in [1usize, 2, 3] {
        for _ in 0..20 {
            out.push(GridSpec::new((0..n).map(|_| random_axis(&mut rng)).collect()).unwrap());
        }
    }
    out
}

fn criterion_1() -> Outcome {
    let grids = fixture_grids();
    ensure(grids.len() >= 50, || "not enough grids".into())?;
    let sample = |n: usize| DyadicCube::new(5, vec![DyadicRational::from_int(-16); n]);
    let mut max_t = 0;
    for (i, g) in grids.iter().enumerate() {
        let n = g.dimension();
        let t = g.tops().len();
        let constant_axes = g.axes().iter().filter(|a| a.tail().is_eventually_constant()).count();
        ensure(t >= 1 && t <= 1 << n, || format!("grid {i}: {t} tops in dimension {n}"))?;
        ensure(t == 1 << constant_axes, || format!("grid {i}: {t} tops, {constant_axes} constant tails"))?;
        let r = g.verify_top_tiling(&sample(n), 10_000);
        ensure(r.passed(), || format!("grid {i}: {} tiling violations", r.violations.len()))?;
        max_t = max_t.max(t);
    }
    Ok(format!("{} grids, tops in [1, {}], 10^4-point tilings clean", grids.len(), max_t))
}

fn criterion_2() -> Outcome {
    for n in [2usize, 3] {
        let tops = GridSpec::standard(n).tops();
        ensure(tops.len() == 1 << n, || format!("n={n}: {} tops", tops.len()))?;
        let zero = DyadicRational::zero();
        let mut seen = std::collections::BTreeSet::new();
        for t in &tops {
            let mut key = Vec::new();
            for f in t.factors() {
                match f {
                    Interval::LeftRay(a) if *a == zero => key.push(false),
                    Interval::RightRay(a) if *a == zero => key.push(true),
                    other => return Err(format!("n={n}: unexpected factor {other}")),
                }
            }
            seen.insert(key);
        }
        ensure(seen.len() == 1 << n, || format!("n={n}: repeated orthants"))?;
    }
    Ok("4 quadrants and 8 octants with boundary 0".into())
}

/// Offsets `s_m` straight from the nesting rule, `m` in `[-40, 40]`.
fn offsets_by_rule(a: &GridAxis) -> Vec<(i64, DyadicRational)> {
    let mut out = Vec::new();
    let mut s = a.base_offset().clone();
    for m in 0..=40i64 {
        out.push((m, s.clone()));
        if a.bit(m as u64) {
            s = &s + &DyadicRational::pow2(m);
        }
    }
    for m in -40..0i64 {
        out.push((m, a.base_offset().mod_pow2(m)));
    }
    out
}

fn criterion_3() -> Outcome {
    let grids: Vec<GridSpec> = fixture_grids().into_iter().filter(|g| g.dimension() == 1).collect();
    let mut translates = 0;
    for (i, g) in grids.iter().enumerate() {
        let axis = &g.axes()[0];
        let tops = g.tops();
        let two_rays = match tops.as_slice() {
            [SuperCube { .. }, SuperCube { .. }] => match (&tops[0].factors()[0], &tops[1].factors()[0]) {
                (Interval::LeftRay(a), Interval::RightRay(b)) if a == b => Some(a.clone()),
                _ => None,
            },
            _ => None,
        };
        let tr = g.is_translate_of_standard().map(|v| v[0].clone());
        ensure(tr == two_rays, || format!("grid {i}: translate {tr:?} vs tops boundary {two_rays:?}"))?;
        if let Some(a) = tr {
            translates += 1;
            for (m, s) in offsets_by_rule(axis) {
                ensure(s == a.mod_pow2(m), || format!("grid {i}: s_{m} = {s} differs from {a} mod 2^{m}"))?;
                for x in ["-37/8", "0", "5/16", "129"] {
                    let x = d(x);
                    let want = &(&x - &a).floor_to_pow2(m) + &a;
                    let got = g.cube_at(std::slice::from_ref(&x), m).corner[0].clone();
                    ensure(got == want, || format!("grid {i}: cube of {x} at scale {m}"))?;
                }
            }
        }
    }
    // tower-union oracle: union of the cubes containing x over scales 1..60
    let g = all_one();
    let axis = &g.axes()[0];
    let rule = offsets_by_rule(axis);
    let a = d("-1");
    for (x, left_top) in [("0", false), ("-2", true), ("7/4", false), ("-1", false), ("-33/32", true)] {
        let x = d(x);
        let mut lower = Vec::new();
        for &(m, ref s) in rule.iter().filter(|(m, _)| (1..=40).contains(m)) {
            let lo = &(&x - s).floor_to_pow2(m) + s;
            lower.push((m, lo));
        }
        let last = &lower.last().unwrap().1;
        let union_is_left = *last < d("-1000");
        ensure(union_is_left == left_top, || format!("tower of {x}"))?;
        if !left_top {
            ensure(lower.iter().skip(2).all(|(_, lo)| *lo == a), || format!("tower of {x} does not start at -1"))?;
        }
        ensure(g.top_of_point(std::slice::from_ref(&x)).contains(std::slice::from_ref(&x)), || "top".into())?;
    }
    ensure(g.is_translate_of_standard() == Some(vec![a.clone()]), || "all-one tail is not D_0 - 1".into())?;
    Ok(format!("{} 1-D grids, {} translates, all-one tail gives a = -1", grids.len(), translates))
}

// ---------------------------------------------------------------- wavelets

fn nodes_in(mu: &Measure, region: &[Interval]) -> Vec<Vec<f64>> {
    let mut out = Vec::new();
    mu.for_each_node(region, |x, _| out.push(x.to_vec()));
    out
}

fn sup_on_nodes(f: &PiecewisePolyFn, mu: &Measure) -> f64 {
    nodes_in(mu, &vec![Interval::FullLine; mu.dimension()])
        .iter()
        .map(|x| f.eval(x).abs())
        .fold(0.0, f64::max)
}

fn window_for(g: &GridSpec, mu: &Measure, probe_scale: i64) -> ScaleWindow {
    let fine = probe_scale + 1;
    ScaleWindow::new(fine, minimal_enclosing_scale(g, mu, fine).unwrap()).unwrap()
}

#[derive(Default)]
struct Worst {
    orth: f64,
    tele: f64,
    moment: f64,
    parseval: f64,
    recon: f64,
}

fn identity_suite(g: &GridSpec, mu: &Measure, sys: &MomentSystem, probes: &[PiecewisePolyFn], w: ScaleWindow, worst: &mut Worst) -> Result<(), String> {
    let mut fns = Vec::new();
    let mut cubes = Vec::new();
    for level in window_levels(g, mu, w) {
        for q in level {
            let b = build_alpert_basis(g, &q, mu, sys).map_err(|e| e.to_string())?;
            worst.moment = worst.moment.max(check_moment_vanishing(&b, mu, sys).max_scaled);
            fns.extend(b.functions().to_vec());
            cubes.push(q);
        }
    }
    for (i, a) in fns.iter().enumerate() {
        for (j, b) in fns.iter().enumerate().skip(i) {
            let want = if i == j { 1.0 } else { 0.0 };
            worst.orth = worst.orth.max((inner_product(a, b, mu) - want).abs());
        }
    }
    let pairs: Vec<(DyadicCube, DyadicCube)> = cubes
        .iter()
        .filter(|q| q.scale == w.fine)
        .take(3)
        .filter_map(|q| Some((g.ancestor(q, w.coarse), g.children(q).into_iter().find(|c| mu.mass(c) > 0.0)?)))
        .collect();
    for f in probes {
        let tree = expand(f, g, mu, sys, w).map_err(|e| e.to_string())?;
        let ff = norm_sq(f, mu);
        for t in &tree.tops {
            for h in &fns {
                worst.orth = worst.orth.max(inner_product(&t.function, h, mu).abs() / ff.max(1e-300));
            }
        }
        worst.parseval = worst.parseval.max(parseval_gap(f, &tree, mu));
        let r = reconstruct(&tree, g, mu, sys).map_err(|e| e.to_string())?;
        for x in nodes_in(mu, &vec![Interval::FullLine; mu.dimension()]) {
            worst.recon = worst.recon.max((r.eval(&x) - f.eval(&x)).abs());
        }
        let sup = sup_on_nodes(f, mu).max(1e-300);
        for (p, q) in &pairs {
            let res = check_telescoping(g, mu, sys, p, q, std::slice::from_ref(f)).map_err(|e| e.to_string())?;
            worst.tele = worst.tele.max(res / sup);
        }
    }
    Ok(())
}

fn report_worst(worst: &Worst) -> Result<String, String> {
    let tol = 1e-10;
    for (name, v) in [
        ("orthonormality", worst.orth),
        ("telescoping", worst.tele),
        ("moment vanishing", worst.moment),
        ("parseval", worst.parseval),
        ("reconstruction", worst.recon),
    ] {
        ensure(v <= tol, || format!("{name} error {v:.3e} > {tol:e}"))?;
    }
    Ok(format!(
        "orth {:.1e}, telescoping {:.1e}, moments {:.1e}, parseval {:.1e}, reconstruction {:.1e}",
        worst.orth, worst.tele, worst.moment, worst.parseval, worst.recon
    ))
}

fn criterion_4() -> Outcome {
    let mut worst = Worst::default();
    let mut runs = 0;
    for (gname, g) in grids() {
        for (mname, mu, m) in measures() {
            for kappa in 1..=3 {
                let sys = MomentSystem::monomials(1, kappa).unwrap();
                let probes = random_probes(&g, &mu, &sys, m, 20, 100 + kappa as u64);
                let w = window_for(&g, &mu, m);
                identity_suite(&g, &mu, &sys, &probes, w, &mut worst).map_err(|e| format!("{gname}/{mname}/k={kappa}: {e}"))?;
                runs += 1;
            }
        }
    }
    report_worst(&worst).map(|s| format!("{runs} fixtures x 20 probes: {s}"))
}

fn plane_atoms() -> Measure {
    let pts = [("-3/4", "1/8", 1.0), ("1/4", "1/4", 2.0), ("5/8", "-3/8", 0.5), ("-1/8", "-7/8", 1.5), ("3/2", "5/4", 0.75)];
    Measure::atoms(pts.iter().map(|(x, y, m)| (vec![d(x), d(y)], *m)).collect()).unwrap()
}

fn criterion_5() -> Outcome {
    let mut checked = 0;
    let mut fixtures: Vec<(GridSpec, Measure, i64)> = Vec::new();
    for (_, g) in grids() {
        fixtures.push((g.clone(), two_atoms(), -3));
        fixtures.push((g, seven_atoms(), -3));
    }
    fixtures.push((GridSpec::standard(2), plane_atoms(), -3));
    for (g, mu, m) in &fixtures {
        let n = g.dimension();
        for kappa in 1..=3 {
            let sys = MomentSystem::monomials(n, kappa).unwrap();
            let w = window_for(g, mu, *m);
            let f = &random_probes(g, mu, &sys, *m, 1, 7)[0];
            let tree = expand(f, g, mu, &sys, w).map_err(|e| e.to_string())?;
            let total: usize = tree.tops.iter().map(|t| t.rank).sum::<usize>() + tree.coefficient_count();
            let k = mu.atom_list().len();
            ensure(total == k, || format!("dimension {total} != {k} atoms (n={n}, kappa={kappa})"))?;
            checked += 1;
        }
    }
    Ok(format!("{checked} atomic fixtures, dimension equals atom count"))
}

fn criterion_6() -> Outcome {
    let mut worst_coeff = 0.0f64;
    let mut runs = 0;
    for (gname, g) in grids() {
        for (mname, mu, m) in measures() {
            for kappa in 1..=3 {
                let mono = MomentSystem::monomials(1, kappa).unwrap();
                let cb = MomentSystem::custom_monomials(1, kappa).unwrap();
                let w = window_for(&g, &mu, m);
                for f in random_probes(&g, &mu, &mono, m, 3, 300 + kappa as u64) {
                    let a = expand(&f, &g, &mu, &mono, w).map_err(|e| e.to_string())?;
                    let b = expand(&f, &g, &mu, &cb, w).map_err(|e| e.to_string())?;
                    ensure(a.cubes.len() == b.cubes.len(), || format!("{gname}/{mname}: cube count differs"))?;
                    for (x, y) in a.cubes.iter().zip(&b.cubes) {
                        ensure(x.cube == y.cube && x.coeffs.len() == y.coeffs.len(), || format!("{gname}/{mname}: tree shape differs"))?;
                        for (u, v) in x.coeffs.iter().zip(&y.coeffs) {
                            worst_coeff = worst_coeff.max((u - v).abs());
                        }
                    }
                    for (s, t) in a.tops.iter().zip(&b.tops) {
                        for x in nodes_in(&mu, s.top.factors()) {
                            worst_coeff = worst_coeff.max((s.function.eval(&x) - t.function.eval(&x)).abs());
                        }
                    }
                    runs += 1;
                }
            }
        }
    }
    ensure(worst_coeff <= 1e-9, || format!("custom monomials differ by {worst_coeff:.3e}"))?;
    let mut worst = Worst::default();
    let exp = MomentSystem::exponential();
    for (gname, g) in grids() {
        for (mname, mu, m) in measures() {
            let probes = random_probes(&g, &mu, &exp, m, 5, 77);
            let w = window_for(&g, &mu, m);
            identity_suite(&g, &mu, &exp, &probes, w, &mut worst).map_err(|e| format!("exp {gname}/{mname}: {e}"))?;
        }
    }
    let s = report_worst(&worst).map_err(|e| format!("{{1, e^x}}: {e}"))?;
    Ok(format!("{runs} tree pairs agree to {worst_coeff:.1e}; {{1, e^x}}: {s}"))
}

fn criterion_7() -> Outcome {
    let mut max_r2 = 0.0f64;
    let mut max_r1_doubling = 0.0f64;
    let mut max_r1 = 0.0f64;
    let mut evals = 0;
    for (_, g) in grids() {
        for (mname, mu, m) in measures() {
            for kappa in 1..=3 {
                let sys = MomentSystem::monomials(1, kappa).unwrap();
                let w = window_for(&g, &mu, m);
                let probes = random_probes(&g, &mu, &sys, m, 4, 500);
                for level in window_levels(&g, &mu, w) {
                    for q in level {
                        for f in &probes {
                            let r = match e_bound_report(f, &q, &mu, &sys) {
                                Ok(r) => r,
                                Err(tops_core::WaveletError::VanishingOnCube(_)) => continue,
                                Err(e) => return Err(e.to_string()),
                            };
                            max_r2 = max_r2.max(r.r2);
                            max_r1 = max_r1.max(r.r1);
                            if mname == "lebesgue" {
                                max_r1_doubling = max_r1_doubling.max(r.r1);
                            }
                            evals += 1;
                        }
                    }
                }
            }
        }
    }
    ensure(max_r2 <= 1.0 + 1e-12, || format!("r2 = {max_r2} exceeds 1"))?;
    ensure(max_r1.is_finite(), || "r1 is unbounded".into())?;
    Ok(format!("{evals} evaluations, max r2 = {max_r2:.6}, max r1 = {max_r1_doubling:.3} (lebesgue), {max_r1:.3} (all)"))
}

// ---------------------------------------------------------------- bilinear

struct FormFixture {
    name: String,
    sigma: Measure,
    omega: Measure,
    kernel: KernelSpec,
    kappa: usize,
    grid: GridSpec,
    splits: Vec<i64>,
    fine: i64,
}

fn atoms_1d(pts: &[(&str, f64)]) -> Measure {
    Measure::atoms(pts.iter().map(|(p, m)| (vec![d(p)], *m)).collect()).unwrap()
}

fn form_fixtures() -> Vec<FormFixture> {
    let sigmas = [
        atoms_1d(&[("-3/4", 1.0), ("-1/8", 0.5), ("5/16", 2.0), ("1", 1.25), ("7/4", 0.6), ("-11/8", 0.9)]),
        atoms_1d(&[("1/4", 1.0)]),
        seven_atoms(),
    ];
    let omegas = [
        atoms_1d(&[("-5/8", 0.8), ("0", 1.1), ("3/8", 0.3), ("13/16", 1.7), ("3/2", 0.4), ("-1", 1.0)]),
        atoms_1d(&[("3/4", 1.0)]),
        two_atoms(),
    ];
    let kernels = [
        KernelSpec::hilbert(),
        KernelSpec::custom_by_id("odd-cubic").unwrap(),
        KernelSpec::custom_by_id("gaussian").unwrap(),
    ];
    let mut out = Vec::new();
    for (i, (s, o)) in sigmas.iter().zip(&omegas).enumerate() {
        for (j, k) in kernels.iter().enumerate() {
            for kappa in 1..=3 {
                let (gname, g) = &grids()[(i + j + kappa) % 3];
                out.push(FormFixture {
                    name: format!("pair{i}/kernel{j}/k={kappa}/{gname}"),
                    sigma: s.clone(),
                    omega: o.clone(),
                    kernel: k.clone(),
                    kappa,
                    grid: g.clone(),
                    splits: vec![3, 4, 5],
                    fine: -4,
                });
            }
        }
    }
    let plane_o = Measure::atoms(vec![
        (vec![d("1/2"), d("-1/2")], 1.0),
        (vec![d("-5/4"), d("3/8")], 0.7),
        (vec![d("1/16"), d("1")], 1.3),
    ])
    .unwrap();
    for comp in 0..2 {
        for kappa in 1..=2 {
            out.push(FormFixture {
                name: format!("plane/riesz{comp}/k={kappa}"),
                sigma: plane_atoms(),
                omega: plane_o.clone(),
                kernel: KernelSpec::riesz(comp),
                kappa,
                grid: GridSpec::standard(2),
                splits: vec![2, 3, 4],
                fine: -4,
            });
        }
    }
    out
}

fn criterion_8() -> Outcome {
    let fixtures = form_fixtures();
    ensure(fixtures.len() >= 20, || "too few form fixtures".into())?;
    let (mut worst_four, mut worst_tops, mut worst_drift) = (0.0f64, 0.0f64, 0.0f64);
    let mut max_top_terms = 0;
    for fx in &fixtures {
        let n = fx.grid.dimension();
        let sys = MomentSystem::monomials(n, fx.kappa).unwrap();
        let f = &random_probes(&fx.grid, &fx.sigma, &sys, fx.fine - 1, 1, 900)[0];
        let g = &random_probes(&fx.grid, &fx.omega, &sys, fx.fine - 1, 1, 901)[0];
        let direct = form_direct(f, g, &fx.sigma, &fx.omega, &fx.kernel).map_err(|e| e.to_string())?;
        let scale = form_scale(f, g, &fx.sigma, &fx.omega, &fx.kernel).max(1e-300);
        let mut first: Option<f64> = None;
        for &split in &fx.splits {
            let w = TruncationWindow::new(split, fx.fine).map_err(|e| e.to_string())?;
            let four = form_four_term(f, g, &fx.sigma, &fx.omega, &fx.kernel, &fx.grid, &sys, w)
                .map_err(|e| format!("{}: {e}", fx.name))?;
            let tops = form_tops(f, g, &fx.sigma, &fx.omega, &fx.kernel, &fx.grid, &sys, w)
                .map_err(|e| format!("{}: {e}", fx.name))?;
            worst_four = worst_four.max((direct - four.total).abs() / scale);
            worst_tops = worst_tops.max((direct - tops.total).abs() / scale);
            let t = first.get_or_insert(four.total);
            worst_drift = worst_drift.max((four.total - *t).abs() / scale);
            ensure(tops.top_terms_f <= 1 << n && tops.top_terms_g <= 1 << n, || format!("{}: too many tops", fx.name))?;
            max_top_terms = max_top_terms.max(tops.top_terms_f.max(tops.top_terms_g));
        }
    }
    ensure(worst_four <= 1e-8, || format!("four-term off by {worst_four:.3e}"))?;
    ensure(worst_tops <= 1e-8, || format!("tops form off by {worst_tops:.3e}"))?;
    ensure(worst_drift <= 1e-10, || format!("split drift {worst_drift:.3e}"))?;
    Ok(format!(
        "{} fixtures: four-term {worst_four:.1e}, tops {worst_tops:.1e}, drift {worst_drift:.1e}, at most {max_top_terms} top terms",
        fixtures.len()
    ))
}

// ---------------------------------------------------------------- oracle

/// Orthonormal basis (columns) of the span of `cols` in `<u, v> = sum w u v`,
/// by modified Gram-Schmidt with reorthogonalization.
fn weighted_mgs(cols: &[Vec<f64>], w: &[f64]) -> Vec<Vec<f64>> {
    let ip = |a: &[f64], b: &[f64]| a.iter().zip(b).zip(w).map(|((x, y), m)| x * y * m).sum::<f64>();
    let mut out: Vec<Vec<f64>> = Vec::new();
    for c in cols {
        let n0 = ip(c, c).sqrt();
        if n0 == 0.0 {
            continue;
        }
        let mut v = c.clone();
        for _ in 0..2 {
            for q in &out {
                let p = ip(&v, q);
                for (vi, qi) in v.iter_mut().zip(q) {
                    *vi -= p * qi;
                }
            }
        }
        let nv = ip(&v, &v).sqrt();
        if nv > 1e-7 * n0 {
            out.push(v.iter().map(|x| x / nv).collect());
        }
    }
    out
}

/// `W^{1/2} U U^T W^{1/2}` for w-orthonormal columns `U`.
fn sym_projector(u: &[Vec<f64>], w: &[f64]) -> DMatrix<f64> {
    let k = w.len();
    DMatrix::from_fn(k, k, |i, j| u.iter().map(|c| c[i] * c[j]).sum::<f64>() * (w[i] * w[j]).sqrt())
}

fn spectral_norm(m: &DMatrix<f64>) -> f64 {
    if m.nrows() == 0 {
        return 0.0;
    }
    SymmetricEigen::new(m.clone()).eigenvalues.iter().fold(0.0, |a, v| a.max(v.abs()))
}

fn oracle_gap(g: &GridSpec, mu: &Measure, q: &DyadicCube, kappa: usize) -> Result<f64, String> {
    let n = g.dimension();
    let atoms: Vec<_> = mu.atom_list().iter().filter(|a| q.contains(&a.point)).collect();
    let w: Vec<f64> = atoms.iter().map(|a| a.mass).collect();
    let centroid: Vec<f64> = (0..n).map(|k| atoms.iter().map(|a| a.coords()[k]).sum::<f64>() / atoms.len().max(1) as f64).collect();
    let exps = tops_core::poly::multi_indices(n, kappa);
    let mono = |beta: &[u32], x: &[f64]| beta.iter().zip(x).zip(&centroid).map(|((b, xi), c)| (xi - c).powi(*b as i32)).product::<f64>();
    let mut gens = Vec::new();
    for child in g.children(q) {
        for beta in &exps {
            gens.push(atoms.iter().map(|a| if child.contains(&a.point) { mono(beta, a.coords()) } else { 0.0 }).collect());
        }
    }
    let moments: Vec<Vec<f64>> = exps.iter().map(|b| atoms.iter().map(|a| mono(b, a.coords())).collect()).collect();
    let p_all = sym_projector(&weighted_mgs(&gens, &w), &w);
    let p_mom = sym_projector(&weighted_mgs(&moments, &w), &w);
    let oracle = p_all - p_mom;

    let sys = MomentSystem::monomials(n, kappa).unwrap();
    let basis = build_alpert_basis(g, q, mu, &sys).map_err(|e| e.to_string())?;
    let hs: Vec<Vec<f64>> = basis.functions().iter().map(|h| atoms.iter().map(|a| h.eval(a.coords())).collect()).collect();
    let main = sym_projector(&hs, &w);
    Ok(spectral_norm(&(main - oracle)))
}

fn criterion_9() -> Outcome {
    let mut fixtures: Vec<(GridSpec, Measure)> = Vec::new();
    for (_, g) in grids() {
        fixtures.push((g.clone(), two_atoms()));
        fixtures.push((g, seven_atoms()));
    }
    fixtures.push((GridSpec::standard(2), plane_atoms()));
    let mut worst = 0.0f64;
    let mut bases = 0;
    for (g, mu) in &fixtures {
        ensure(mu.atom_list().len() <= 8, || "fixture too large".into())?;
        let w = window_for(g, mu, -3);
        for kappa in 1..=3 {
            for level in window_levels(g, mu, w) {
                for q in level {
                    worst = worst.max(oracle_gap(g, mu, &q, kappa)?);
                    bases += 1;
                }
            }
        }
    }
    ensure(worst <= 1e-9, || format!("projector gap {worst:.3e}"))?;
    Ok(format!("{bases} bases match the oracle projector to {worst:.1e}"))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 9] = [
        ("tops bound and tiling", criterion_1),
        ("quadrants and octants", criterion_2),
        ("translate characterization", criterion_3),
        ("expansion identity suite", criterion_4),
        ("dimension accounting", criterion_5),
        ("general moment systems", criterion_6),
        ("average bounds", criterion_7),
        ("bilinear three-way agreement", criterion_8),
        ("brute-force oracle", criterion_9),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = run();
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("criterion {} [{name}]: PASS ({secs:.2}s) {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("criterion {} [{name}]: FAIL ({secs:.2}s) {detail}", i + 1);
            }
        }
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
