//! Small least-squares helpers for slope and quadratic-growth fits.

/// Ordinary least squares line `y = slope * x + intercept`.
pub fn linear_fit(xs: &[f64], ys: &[f64]) -> (f64, f64) {
    assert_eq!(xs.len(), ys.len());
    let n = xs.len() as f64;
    let sx: f64 = xs.iter().sum();
    let sy: f64 = ys.iter().sum();
    let sxx: f64 = xs.iter().map(|x| x * x).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| x * y).sum();
    let denom = n * sxx - sx * sx;
    let slope = (n * sxy - sx * sy) / denom;
    let intercept = (sy - slope * sx) / n;
    (slope, intercept)
}

/// Slope of `log2(y)` against `x`, ignoring non-positive values.
pub fn log2_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let pairs: (Vec<f64>, Vec<f64>) = xs
        .iter()
        .zip(ys)
        .filter(|(_, y)| **y > 0.0)
        .map(|(x, y)| (*x, y.log2()))
        .unzip();
    linear_fit(&pairs.0, &pairs.1).0
}

/// Least squares for `y = a + b * t^2`, returning `(a, b, rms_residual)`.
pub fn quadratic_t2_fit(ts: &[f64], ys: &[f64]) -> (f64, f64, f64) {
    assert_eq!(ts.len(), ys.len());
    let n = ts.len() as f64;
    let q: Vec<f64> = ts.iter().map(|t| t * t).collect();
    let sq: f64 = q.iter().sum();
    let sqq: f64 = q.iter().map(|x| x * x).sum();
    let sy: f64 = ys.iter().sum();
    let sqy: f64 = q.iter().zip(ys).map(|(x, y)| x * y).sum();
    let denom = n * sqq - sq * sq;
    let b = (n * sqy - sq * sy) / denom;
    let a = (sy - b * sq) / n;
    let rms = (ts
        .iter()
        .zip(ys)
        .map(|(t, y)| {
            let e = y - (a + b * t * t);
            e * e
        })
        .sum::<f64>()
        / n)
        .sqrt();
    (a, b, rms)
}
