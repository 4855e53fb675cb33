//! Marching-squares level-set length.

/// Total length of the piecewise-linear level set `{v = level}` of a nodal
/// field on a uniform grid with spacing `h`. Saddle cells are resolved by the
/// cell-centre average.
pub fn contour_length(values: &[f64], width: usize, height: usize, h: f64, level: f64) -> f64 {
    assert_eq!(values.len(), width * height);
    let mut total = 0.0;
    for j in 0..height.saturating_sub(1) {
        for i in 0..width.saturating_sub(1) {
            let idx = j * width + i;
            // corners counterclockwise from the lower left
            let v = [
                values[idx] - level,
                values[idx + 1] - level,
                values[idx + width + 1] - level,
                values[idx + width] - level,
            ];
            let above = v.map(|x| x > 0.0);
            if above.iter().all(|&a| a) || above.iter().all(|&a| !a) {
                continue;
            }
            let corner = [(0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (0.0, 1.0)];
            let mut pts = [(0.0, 0.0); 4];
            let mut m = 0;
            for e in 0..4 {
                let f = (e + 1) % 4;
                if above[e] != above[f] {
                    let s = v[e] / (v[e] - v[f]);
                    let (x0, y0) = corner[e];
                    let (x1, y1) = corner[f];
                    pts[m] = (x0 + s * (x1 - x0), y0 + s * (y1 - y0));
                    m += 1;
                }
            }
            let seg = |a: (f64, f64), b: (f64, f64)| (a.0 - b.0).hypot(a.1 - b.1);
            total += if m == 2 {
                seg(pts[0], pts[1])
            } else {
                // Saddle: crossings sit on all four edges in order 0..3.
                let centre_above = v.iter().sum::<f64>() > 0.0;
                if centre_above == above[0] {
                    // corner 0 region connects through the centre; cut off corners 1 and 3
                    seg(pts[0], pts[1]) + seg(pts[2], pts[3])
                } else {
                    seg(pts[3], pts[0]) + seg(pts[1], pts[2])
                }
            };
        }
    }
    total * h
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn circle_length() {
        let n = 201;
        let h = 4.0 / (n - 1) as f64;
        let vals: Vec<f64> = (0..n * n)
            .map(|k| {
                let x = -2.0 + (k % n) as f64 * h;
                let y = -2.0 + (k / n) as f64 * h;
                1.0 - x.hypot(y)
            })
            .collect();
        let l = contour_length(&vals, n, n, h, 0.25);
        let exact = 2.0 * std::f64::consts::PI * 0.75;
        assert!((l - exact).abs() / exact < 1e-3, "{l}");
    }

    #[test]
    fn straight_line() {
        let (w, hgt) = (10, 6);
        let vals: Vec<f64> = (0..w * hgt).map(|k| (k / w) as f64 + 0.3).collect();
        let l = contour_length(&vals, w, hgt, 0.5, 2.0);
        assert!((l - 4.5).abs() < 1e-12);
    }
}
