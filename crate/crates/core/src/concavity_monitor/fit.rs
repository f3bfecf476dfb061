/// Least-squares polynomial fit `y = c0 + c1 t + ... + c_deg t^deg`.
#[derive(Clone, Debug, PartialEq)]
pub struct PolyFit {
    pub coeffs: Vec<f64>,
    /// Standard errors of the coefficients; zero when the fit is exact-determined.
    pub std_errors: Vec<f64>,
}

fn solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    for c in 0..n {
        let p = (c..n).max_by(|&i, &j| a[i][c].abs().total_cmp(&a[j][c].abs()))?;
        if a[p][c] == 0.0 {
            return None;
        }
        a.swap(c, p);
        b.swap(c, p);
        for r in c + 1..n {
            let f = a[r][c] / a[c][c];
            for k in c..n {
                a[r][k] -= f * a[c][k];
            }
            b[r] -= f * b[c];
        }
    }
    let mut x = vec![0.0; n];
    for c in (0..n).rev() {
        let s: f64 = (c + 1..n).map(|k| a[c][k] * x[k]).sum();
        x[c] = (b[c] - s) / a[c][c];
    }
    Some(x)
}

/// Fits in the scaled variable `t / t_max` for conditioning.
pub fn polyfit(ts: &[f64], ys: &[f64], deg: usize) -> Option<PolyFit> {
    let p = deg + 1;
    if ts.len() < p || ts.len() != ys.len() {
        return None;
    }
    let scale = ts.iter().fold(0.0f64, |a, &t| a.max(t.abs()));
    let scale = if scale > 0.0 { scale } else { 1.0 };
    let row = |t: f64| (0..p).map(|k| (t / scale).powi(k as i32)).collect::<Vec<_>>();
    let mut ata = vec![vec![0.0; p]; p];
    let mut aty = vec![0.0; p];
    for (&t, &y) in ts.iter().zip(ys) {
        let r = row(t);
        for i in 0..p {
            aty[i] += r[i] * y;
            for j in 0..p {
                ata[i][j] += r[i] * r[j];
            }
        }
    }
    let c = solve(ata.clone(), aty)?;
    let ssr: f64 = ts.iter().zip(ys).map(|(&t, &y)| {
        let r = row(t);
        let f: f64 = r.iter().zip(&c).map(|(a, b)| a * b).sum();
        (y - f).powi(2)
    }).sum();
    let dof = ts.len() - p;
    let var = if dof > 0 { ssr / dof as f64 } else { 0.0 };
    let mut std_errors = Vec::with_capacity(p);
    for k in 0..p {
        let mut e = vec![0.0; p];
        e[k] = 1.0;
        let col = solve(ata.clone(), e)?;
        std_errors.push((var * col[k]).sqrt() / scale.powi(k as i32));
    }
    let coeffs = c.iter().enumerate().map(|(k, v)| v / scale.powi(k as i32)).collect();
    Some(PolyFit { coeffs, std_errors })
}
