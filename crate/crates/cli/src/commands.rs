use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde_json::{json, Value};

use tops_core::bilinear::{form_direct, form_four_term, form_scale, form_tops, TruncationWindow};
use tops_core::grid::Interval;
use tops_core::io::{to_json_fixed, SystemDoc, TreeDoc, SCHEMA_VERSION};
use tops_core::measure::{inner_product, norm_sq};
use tops_core::probe::random_probes;
use tops_core::wavelet::{
    build_alpert_basis, check_moment_vanishing, check_telescoping, e_bound_report, expand as expand_tree, parseval_gap,
    reconstruct, window_levels, AlpertBasis, ScaleWindow,
};
use tops_core::{DyadicCube, DyadicRational, GridSpec, Measure, MomentSystem, PiecewisePolyFn, WaveletError};

use super::*;

fn write_out(dir: &Path, name: &str, body: &str) -> Result<(), Failure> {
    fs::create_dir_all(dir).map_err(|e| Failure::Input(format!("cannot create {}: {e}", dir.display())))?;
    let path = dir.join(name);
    fs::write(&path, body).map_err(|e| Failure::Input(format!("cannot write {}: {e}", path.display())))
}

fn write_json(dir: &Path, name: &str, v: &Value) -> Result<(), Failure> {
    write_out(dir, name, &to_json_fixed(v))
}

fn scale_window(w: Window) -> Result<ScaleWindow, Failure> {
    ScaleWindow::new(w.fine, w.coarse).map_err(input)
}

fn check_tol(tol: f64) -> Result<(), Failure> {
    if tol > 0.0 && tol.is_finite() {
        Ok(())
    } else {
        Err(Failure::Input(format!("tolerance {tol} must be positive")))
    }
}

fn to_value<T: serde::Serialize + ?Sized>(v: &T) -> Value {
    serde_json::to_value(v).expect("report values serialize")
}

pub(crate) fn tops(a: &TopsArgs) -> Result<(), Failure> {
    let grid = load_grid(&a.common.grid)?;
    if a.samples == 0 {
        return Err(Failure::Input("--samples must be positive".into()));
    }
    let n = grid.dimension();
    let half = DyadicRational::pow2(a.sample_scale - 1);
    let sample = DyadicCube::new(a.sample_scale, vec![-&half; n]);
    let report = grid.verify_top_tiling(&sample, a.samples);
    let tops: Vec<Value> = report
        .tops
        .iter()
        .zip(&report.hits)
        .enumerate()
        .map(|(i, (t, h))| json!({"index": i, "top": t.to_string(), "factors": to_value(t.factors()), "hits": h}))
        .collect();
    let doc = json!({
        "schema": SCHEMA_VERSION,
        "command": "tops",
        "dimension": n,
        "count": report.tops.len(),
        "translate_of_standard": grid.is_translate_of_standard().map(|v| to_value(&v)),
        "tops": tops,
        "tiling": {
            "sample_box": sample.to_string(),
            "samples": report.samples,
            "violations": to_value(&report.violations),
            "passed": report.passed(),
        },
    });
    write_json(&a.common.out, "tops.json", &doc)?;
    println!("{} tops in dimension {n}", report.tops.len());
    for t in &report.tops {
        println!("  {t}");
    }
    if !report.passed() {
        let v = &report.violations[0];
        return Err(Failure::Tolerance(format!(
            "tiling: {} of {} points misassigned, first at {:?} (in {} tops)",
            report.violations.len(),
            report.samples,
            v.point.iter().map(|x| x.to_string()).collect::<Vec<_>>(),
            v.containing
        )));
    }
    Ok(())
}

fn bases_in(grid: &GridSpec, mu: &Measure, sys: &MomentSystem, w: ScaleWindow) -> Result<Vec<AlpertBasis>, Failure> {
    window_levels(grid, mu, w)
        .into_iter()
        .flatten()
        .map(|q| build_alpert_basis(grid, &q, mu, sys).map_err(input))
        .collect()
}

pub(crate) fn basis(a: &BasisArgs) -> Result<(), Failure> {
    let grid = load_grid(&a.common.grid)?;
    let mu = load_measure(&a.measure, &grid)?;
    let sys = load_system(&a.system, grid.dimension())?;
    let w = scale_window(a.window)?;
    let bases = bases_in(&grid, &mu, &sys, w)?;
    let mut csv = String::from("scale,cubes,dimension\n");
    let mut per_scale: std::collections::BTreeMap<i64, (usize, usize)> = Default::default();
    let cubes: Vec<Value> = bases
        .iter()
        .map(|b| {
            let e = per_scale.entry(b.cube().scale).or_default();
            e.0 += 1;
            e.1 += b.dim();
            let c = b.coefficients();
            let columns: Vec<Vec<f64>> = (0..c.ncols()).map(|j| c.column(j).iter().copied().collect()).collect();
            json!({
                "cube": to_value(b.cube()),
                "mass": mu.mass(b.cube()),
                "dim": b.dim(),
                "children": to_value(b.children()),
                "coefficients": columns,
            })
        })
        .collect();
    for (m, (count, dim)) in &per_scale {
        writeln!(csv, "{m},{count},{dim}").unwrap();
    }
    let total: usize = bases.iter().map(AlpertBasis::dim).sum();
    let doc = json!({
        "schema": SCHEMA_VERSION,
        "command": "basis",
        "system": to_value(&SystemDoc::from_system(&sys)),
        "window": to_value(&w),
        "total_dim": total,
        "cubes": cubes,
    });
    write_json(&a.common.out, "basis.json", &doc)?;
    write_out(&a.common.out, "dims.csv", &csv)?;
    println!("{} cubes, total dimension {total}", bases.len());
    Ok(())
}

pub(crate) fn expand(a: &ExpandArgs) -> Result<(), Failure> {
    check_tol(a.tol)?;
    let grid = load_grid(&a.common.grid)?;
    let mu = load_measure(&a.measure, &grid)?;
    let sys = load_system(&a.system, grid.dimension())?;
    let f = load_function(&a.function, &sys)?;
    let w = scale_window(a.window)?;
    let tree = expand_tree(&f, &grid, &mu, &sys, w).map_err(input)?;
    let gap = parseval_gap(&f, &tree, &mu);
    let mut csv = String::from("scale,max_abs,l2\n");
    for (m, mx, l2) in tree.magnitude_by_scale() {
        writeln!(csv, "{m},{mx:.16e},{l2:.16e}").unwrap();
    }
    let tops_energy: f64 = tree.tops.iter().map(|t| norm_sq(&t.function, &mu)).sum();
    write_json(&a.common.out, "tree.json", &to_value(&TreeDoc::from_tree(&tree)))?;
    let doc = json!({
        "schema": SCHEMA_VERSION,
        "command": "expand",
        "window": to_value(&w),
        "norm_sq": norm_sq(&f, &mu),
        "top_energy": tops_energy,
        "coefficient_energy": tree.coefficient_energy(),
        "coefficient_count": tree.coefficient_count(),
        "top_ranks": tree.tops.iter().map(|t| t.rank).collect::<Vec<_>>(),
        "parseval_gap": gap,
        "tol": a.tol,
        "passed": gap <= a.tol,
    });
    write_json(&a.common.out, "expand.json", &doc)?;
    write_out(&a.common.out, "magnitudes.csv", &csv)?;
    println!("{} coefficients, {} tops, parseval gap {gap:.3e}", tree.coefficient_count(), tree.tops.len());
    if gap > a.tol {
        return Err(Failure::Tolerance(format!("parseval: relative gap {gap:e} exceeds {:e}", a.tol)));
    }
    Ok(())
}

/// Worst value of one property and where it occurred.
struct Check {
    name: &'static str,
    tol: f64,
    worst: f64,
    at: String,
}

impl Check {
    fn new(name: &'static str, tol: f64) -> Self {
        Self {
            name,
            tol,
            worst: 0.0,
            at: String::new(),
        }
    }

    fn record(&mut self, v: f64, at: impl FnOnce() -> String) {
        if v > self.worst || v.is_nan() {
            self.worst = v;
            self.at = at();
        }
    }

    fn passed(&self) -> bool {
        self.worst <= self.tol
    }

    fn to_json(&self) -> Value {
        json!({"name": self.name, "worst": self.worst, "tol": self.tol, "passed": self.passed(), "at": self.at})
    }
}

fn all_nodes(mu: &Measure) -> Vec<Vec<f64>> {
    let mut out = Vec::new();
    mu.for_each_node(&vec![Interval::FullLine; mu.dimension()], |x, _| out.push(x.to_vec()));
    out
}

pub(crate) fn verify(a: &VerifyArgs) -> Result<(), Failure> {
    check_tol(a.tol)?;
    let grid = load_grid(&a.common.grid)?;
    let mu = load_measure(&a.measure, &grid)?;
    let sys = load_system(&a.system, grid.dimension())?;
    let w = scale_window(a.window)?;
    let mut probes = random_probes(&grid, &mu, &sys, w.fine - 1, a.probes, a.seed);
    if let Some(p) = &a.function {
        probes.push(load_function(p, &sys)?);
    }
    let tol = a.tol;
    let mut orth = Check::new("orthonormality", tol);
    let mut moments = Check::new("moment_vanishing", tol);
    let mut parseval = Check::new("parseval", tol);
    let mut recon = Check::new("reconstruction", tol);
    let mut top_orth = Check::new("top_orthogonality", tol);
    let mut tele = Check::new("telescoping", tol);
    let mut avg = Check::new("average_bound", 1e-12);

    let bases = bases_in(&grid, &mu, &sys, w)?;
    let fns: Vec<(&DyadicCube, &PiecewisePolyFn)> =
        bases.iter().flat_map(|b| b.functions().iter().map(move |h| (b.cube(), h))).collect();
    for (i, (qa, ha)) in fns.iter().enumerate() {
        for (qb, hb) in &fns[i..] {
            let want = if std::ptr::eq(*ha, *hb) { 1.0 } else { 0.0 };
            orth.record((inner_product(ha, hb, &mu) - want).abs(), || format!("{qa} / {qb}"));
        }
    }
    for b in &bases {
        moments.record(check_moment_vanishing(b, &mu, &sys).max_scaled, || b.cube().to_string());
    }

    let nodes = all_nodes(&mu);
    let pairs: Vec<(DyadicCube, DyadicCube)> = bases
        .iter()
        .filter(|b| b.cube().scale == w.fine)
        .filter_map(|b| {
            let leaf = grid.children(b.cube()).into_iter().find(|c| mu.mass(c) > 0.0)?;
            Some((grid.ancestor(b.cube(), w.coarse), leaf))
        })
        .take(4)
        .collect();
    let mut doubling: std::collections::BTreeMap<i64, (usize, f64, f64, f64)> = Default::default();
    for (k, f) in probes.iter().enumerate() {
        let tree = expand_tree(f, &grid, &mu, &sys, w).map_err(input)?;
        parseval.record(parseval_gap(f, &tree, &mu), || format!("probe {k}"));
        let r = reconstruct(&tree, &grid, &mu, &sys).map_err(input)?;
        for x in &nodes {
            recon.record((r.eval(x) - f.eval(x)).abs(), || format!("probe {k} at {x:?}"));
        }
        let ff = norm_sq(f, &mu).max(f64::MIN_POSITIVE);
        for t in &tree.tops {
            for (q, h) in &fns {
                top_orth.record(inner_product(&t.function, h, &mu).abs() / ff.sqrt(), || format!("{} / {q}", t.top));
            }
        }
        let sup = nodes.iter().map(|x| f.eval(x).abs()).fold(0.0, f64::max).max(f64::MIN_POSITIVE);
        for (p, q) in &pairs {
            let res = check_telescoping(&grid, &mu, &sys, p, q, std::slice::from_ref(f)).map_err(input)?;
            tele.record(res / sup, || format!("probe {k}, {q} in {p}"));
        }
        for b in &bases {
            let q = b.cube();
            let e = match e_bound_report(f, q, &mu, &sys) {
                Ok(e) => e,
                Err(WaveletError::VanishingOnCube(_)) => continue,
                Err(e) => return Err(input(e)),
            };
            avg.record(e.r2 - 1.0, || format!("probe {k} on {q}"));
            let row = doubling.entry(q.scale).or_insert((0, 0.0, 0.0, 0.0));
            row.0 += 1;
            row.1 = row.1.max(mu.mass_box(&q.doubled()) / mu.mass(q));
            row.2 = row.2.max(e.r1);
            row.3 = row.3.max(e.r2);
        }
    }
    let checks = [orth, moments, parseval, recon, top_orth, tele, avg];
    let mut csv = String::from("scale,evaluations,max_doubling_ratio,max_r1,max_r2\n");
    for (m, (c, d, r1, r2)) in &doubling {
        writeln!(csv, "{m},{c},{d:.16e},{r1:.16e},{r2:.16e}").unwrap();
    }
    let doc = json!({
        "schema": SCHEMA_VERSION,
        "command": "verify",
        "system": to_value(&SystemDoc::from_system(&sys)),
        "window": to_value(&w),
        "probes": probes.len(),
        "seed": a.seed,
        "properties": checks.iter().map(Check::to_json).collect::<Vec<_>>(),
        "passed": checks.iter().all(Check::passed),
    });
    write_json(&a.common.out, "verify.json", &doc)?;
    write_out(&a.common.out, "doubling.csv", &csv)?;
    for c in &checks {
        println!("{:<20} {} worst {:.3e} (tol {:e})", c.name, if c.passed() { "pass" } else { "FAIL" }, c.worst, c.tol);
    }
    match checks.iter().find(|c| !c.passed()) {
        Some(c) => Err(Failure::Tolerance(format!("{}: {:e} exceeds {:e} at {}", c.name, c.worst, c.tol, c.at))),
        None => Ok(()),
    }
}

pub(crate) fn bilinear(a: &BilinearArgs) -> Result<(), Failure> {
    check_tol(a.tol)?;
    let grid = load_grid(&a.common.grid)?;
    let [s, o] = a.measure.as_slice() else {
        return Err(Failure::Input("give --measure twice: sigma then omega".into()));
    };
    let [fp, gp] = a.function.as_slice() else {
        return Err(Failure::Input("give --function twice: f then g".into()));
    };
    let (sigma, omega) = (load_measure(s, &grid)?, load_measure(o, &grid)?);
    let sys = load_system(&a.system, grid.dimension())?;
    let (f, g) = (load_function(fp, &sys)?, load_function(gp, &sys)?);
    let kernel = load_kernel(&a.kernel)?;
    let w = TruncationWindow::new(a.window.coarse, a.window.fine).map_err(input)?;
    let direct = form_direct(&f, &g, &sigma, &omega, &kernel).map_err(input)?;
    let scale = form_scale(&f, &g, &sigma, &omega, &kernel);
    let four = form_four_term(&f, &g, &sigma, &omega, &kernel, &grid, &sys, w).map_err(input)?;
    let tops = form_tops(&f, &g, &sigma, &omega, &kernel, &grid, &sys, w).map_err(input)?;
    let denom = scale.max(f64::MIN_POSITIVE);
    let (e4, et) = ((four.total - direct).abs() / denom, (tops.total - direct).abs() / denom);
    let passed = e4 <= a.tol && et <= a.tol;
    let doc = json!({
        "schema": SCHEMA_VERSION,
        "command": "bilinear",
        "window": to_value(&w),
        "direct": direct,
        "scale": scale,
        "four_term": to_value(&four),
        "tops_form": to_value(&tops),
        "four_term_gap": e4,
        "tops_gap": et,
        "tol": a.tol,
        "passed": passed,
    });
    write_json(&a.common.out, "bilinear.json", &doc)?;
    println!("direct {direct:.12e}, four-term {:.12e}, tops {:.12e}", four.total, tops.total);
    if e4 > a.tol {
        return Err(Failure::Tolerance(format!("four-term form: relative gap {e4:e} exceeds {:e}", a.tol)));
    }
    if et > a.tol {
        return Err(Failure::Tolerance(format!("tops form: relative gap {et:e} exceeds {:e}", a.tol)));
    }
    Ok(())
}
