//! Square-loss RVFL and ELM output weights in closed form.
//!
//! Uses the dual form `Z^T (Z Z^T + I/C)^{-1} Y` when there are fewer samples
//! than design columns and the primal form `(Z^T Z + I/C)^{-1} Z^T Y`
//! otherwise. Both systems are SPD and solved by Cholesky.

use ndarray::{Array1, Array2, ArrayView1, ArrayView2};

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::feature_map::RandomFeatureMap;
use crate::linalg::solve_spd;
use crate::model::{ModelWeights, Variant};

fn check(z: &ArrayView2<f64>, y: &ArrayView1<f64>, c: f64) -> Result<()> {
    if !(c > 0.0) {
        return Err(Error::invalid(format!("C must be positive, got {c}")));
    }
    if z.nrows() != y.len() {
        return Err(Error::shape(format!(
            "design matrix has {} rows but {} targets",
            z.nrows(),
            y.len()
        )));
    }
    if z.iter().any(|v| !v.is_finite()) {
        return Err(Error::invalid("design matrix contains non-finite values"));
    }
    Ok(())
}

fn add_ridge(mut a: Array2<f64>, c: f64) -> Array2<f64> {
    let r = 1.0 / c;
    a.diag_mut().mapv_inplace(|v| v + r);
    a
}

pub fn solve_ridge_primal(z: ArrayView2<f64>, y: ArrayView1<f64>, c: f64) -> Result<Array1<f64>> {
    check(&z, &y, c)?;
    let gram = add_ridge(z.t().dot(&z), c);
    let rhs = z.t().dot(&y);
    solve_spd(gram.view(), rhs.view())
}

pub fn solve_ridge_dual(z: ArrayView2<f64>, y: ArrayView1<f64>, c: f64) -> Result<Array1<f64>> {
    check(&z, &y, c)?;
    let kernel = add_ridge(z.dot(&z.t()), c);
    let alpha = solve_spd(kernel.view(), y)?;
    Ok(z.t().dot(&alpha))
}

/// Minimizer of `(C/2)||Z beta - Y||^2 + (1/2)||beta||^2`.
pub fn solve_ridge(z: ArrayView2<f64>, y: ArrayView1<f64>, c: f64) -> Result<Array1<f64>> {
    if z.nrows() < z.ncols() {
        solve_ridge_dual(z, y, c)
    } else {
        solve_ridge_primal(z, y, c)
    }
}

fn fit_closed_form(
    variant: Variant,
    data: &Dataset,
    c: f64,
    map: &RandomFeatureMap,
) -> Result<ModelWeights> {
    let z = variant.design_matrix(map, data.x().view())?;
    let beta = solve_ridge(z.view(), data.y().view(), c)?;
    ModelWeights::new(variant, map.clone(), beta, c, None)
}

/// RVFL: ridge on `[X | H1]`.
pub fn fit_rvfl(data: &Dataset, c: f64, map: &RandomFeatureMap) -> Result<ModelWeights> {
    fit_closed_form(Variant::Rvfl, data, c, map)
}

/// ELM (RVFL without direct links): ridge on `H1` only.
pub fn fit_elm(data: &Dataset, c: f64, map: &RandomFeatureMap) -> Result<ModelWeights> {
    fit_closed_form(Variant::Elm, data, c, map)
}
