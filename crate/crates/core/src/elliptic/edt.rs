use super::grid::MaskedGrid;

/// Exact Euclidean distance from every node to the nearest node with `mask` set
/// (Felzenszwalb–Huttenlocher separable transform). `∞` if the mask is empty.
pub fn distance_to_nodes(g: &MaskedGrid, mask: &[bool]) -> Vec<f64> {
    let (nx, ny) = (g.nx, g.ny);
    let big = 1e30;
    let mut d2: Vec<f64> = mask.iter().map(|&m| if m { 0.0 } else { big }).collect();
    let mut buf = vec![0.0; nx.max(ny)];
    let mut out = vec![0.0; nx.max(ny)];
    for j in 0..ny {
        buf[..nx].copy_from_slice(&d2[j * nx..(j + 1) * nx]);
        transform_1d(&buf[..nx], &mut out[..nx]);
        d2[j * nx..(j + 1) * nx].copy_from_slice(&out[..nx]);
    }
    for i in 0..nx {
        for j in 0..ny {
            buf[j] = d2[j * nx + i];
        }
        transform_1d(&buf[..ny], &mut out[..ny]);
        for j in 0..ny {
            d2[j * nx + i] = out[j];
        }
    }
    d2.into_iter()
        .map(|v| if v >= big * 0.5 { f64::INFINITY } else { v.sqrt() * g.h })
        .collect()
}

// lower envelope of parabolas y = f[q] + (x − q)²
fn transform_1d(f: &[f64], d: &mut [f64]) {
    let n = f.len();
    let mut v = vec![0usize; n];
    let mut z = vec![0.0f64; n + 1];
    let mut k = 0usize;
    z[0] = f64::NEG_INFINITY;
    z[1] = f64::INFINITY;
    let cross = |q: usize, p: usize| {
        ((f[q] + (q * q) as f64) - (f[p] + (p * p) as f64)) / (2.0 * (q as f64 - p as f64))
    };
    for q in 1..n {
        let mut s = cross(q, v[k]);
        while s <= z[k] {
            k -= 1;
            s = cross(q, v[k]);
        }
        k += 1;
        v[k] = q;
        z[k] = s;
        z[k + 1] = f64::INFINITY;
    }
    k = 0;
    for (q, dq) in d.iter_mut().enumerate() {
        while z[k + 1] < q as f64 {
            k += 1;
        }
        let p = v[k];
        let dx = q as f64 - p as f64;
        *dq = dx * dx + f[p];
    }
}
