//! Small dense symmetric helpers on top of nalgebra.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

/// Eigenpairs of a symmetric matrix, eigenvalues descending.
pub fn sym_eigen_desc(a: &DMatrix<f64>) -> (Vec<f64>, DMatrix<f64>) {
    let n = a.nrows();
    if n == 0 {
        return (Vec::new(), DMatrix::zeros(0, 0));
    }
    let sym = (a + a.transpose()) * 0.5;
    let eig = SymmetricEigen::new(sym);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[j].total_cmp(&eig.eigenvalues[i]).then(i.cmp(&j)));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = DMatrix::from_fn(n, n, |r, c| eig.eigenvectors[(r, order[c])]);
    (values, vectors)
}

/// Number of leading eigenvalues kept by the rank rule
/// `lambda > rel * lambda_max` and `lambda > floor`.
pub fn revealed_rank(desc: &[f64], rel: f64, floor: f64) -> usize {
    let Some(&max) = desc.first() else {
        return 0;
    };
    if max <= floor {
        return 0;
    }
    desc.iter().take_while(|&&l| l > rel * max && l > floor).count()
}

/// Orthonormal basis (columns) of the null space of `m`.
///
/// Row space from the SVD with singular values above `rel * sigma_max`; the
/// complement comes from the eigenvectors of `I - R^T R` with eigenvalue near 1.
pub fn null_space(m: &DMatrix<f64>, rel: f64) -> DMatrix<f64> {
    let cols = m.ncols();
    if cols == 0 {
        return DMatrix::zeros(0, 0);
    }
    if m.nrows() == 0 {
        return DMatrix::identity(cols, cols);
    }
    let svd = m.clone().svd(false, true);
    let vt = svd.v_t.expect("v_t requested");
    let smax = svd.singular_values.iter().cloned().fold(0.0, f64::max);
    let mut proj = DMatrix::<f64>::identity(cols, cols);
    if smax > 0.0 {
        for (i, &s) in svd.singular_values.iter().enumerate() {
            if s > rel * smax {
                let v = vt.row(i).transpose();
                proj -= &v * v.transpose();
            }
        }
    }
    let (vals, vecs) = sym_eigen_desc(&proj);
    let k = vals.iter().take_while(|&&l| l > 0.5).count();
    vecs.columns(0, k).into_owned()
}

/// Solves `G x = b` on a subset of coordinates chosen greedily in index
/// order: coordinate `j` is kept when its Schur complement against the kept
/// ones exceeds `rel * G_jj` and `G_jj > floor`. Dropped coordinates get 0.
/// Returns the solution and the number of kept coordinates.
pub fn pivoted_solve(g: &DMatrix<f64>, b: &DVector<f64>, rel: f64, floor: f64) -> (DVector<f64>, usize) {
    let n = g.nrows();
    let mut kept: Vec<usize> = Vec::new();
    // rows of the Cholesky factor of G restricted to `kept`
    let mut l: Vec<Vec<f64>> = Vec::new();
    for j in 0..n {
        let gjj = g[(j, j)];
        if gjj.is_nan() || gjj <= floor {
            continue;
        }
        let mut y = Vec::with_capacity(kept.len());
        for (r, row) in l.iter().enumerate() {
            let s: f64 = row[..r].iter().zip(&y).map(|(a, b)| a * b).sum();
            y.push((g[(kept[r], j)] - s) / row[r]);
        }
        let schur = gjj - y.iter().map(|v| v * v).sum::<f64>();
        if schur > rel * gjj {
            y.push(schur.sqrt());
            l.push(y);
            kept.push(j);
        }
    }
    let k = kept.len();
    let mut z = vec![0.0; k];
    for r in 0..k {
        let s: f64 = (0..r).map(|c| l[r][c] * z[c]).sum();
        z[r] = (b[kept[r]] - s) / l[r][r];
    }
    let mut c = vec![0.0; k];
    for r in (0..k).rev() {
        let s: f64 = (r + 1..k).map(|q| l[q][r] * c[q]).sum();
        c[r] = (z[r] - s) / l[r][r];
    }
    let mut x = DVector::zeros(n);
    for (r, &j) in kept.iter().enumerate() {
        x[j] = c[r];
    }
    (x, k)
}
