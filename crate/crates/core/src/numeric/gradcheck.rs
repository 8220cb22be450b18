/// Max over coordinates of `|central difference - analytic| / (|analytic| + 1e-8)`.
pub fn finite_diff_check<F>(mut loss: F, param: &[f64], analytic: &[f64], h: f64) -> f64
where
    F: FnMut(&[f64]) -> f64,
{
    assert_eq!(param.len(), analytic.len(), "finite_diff_check shape");
    assert!(h > 0.0, "finite_diff_check step must be positive");
    let mut x = param.to_vec();
    let mut worst = 0.0f64;
    for i in 0..x.len() {
        let orig = x[i];
        x[i] = orig + h;
        let up = loss(&x);
        x[i] = orig - h;
        let down = loss(&x);
        x[i] = orig;
        let numeric = (up - down) / (2.0 * h);
        let err = (numeric - analytic[i]).abs() / (analytic[i].abs() + 1e-8);
        worst = worst.max(err);
    }
    worst
}
