//! Linear and bilinear lookups into sampled arrays. Samples outside the grid are zero.

use std::ops::{Add, Mul};

use super::grid::Grid1D;

#[inline]
fn split(f: f64, n: usize) -> Option<(isize, f64)> {
    if !(f > -1.0 && f < n as f64) {
        return None;
    }
    let i0 = f.floor();
    Some((i0 as isize, f - i0))
}

#[inline]
fn sample<T: Copy + Default>(values: &[T], i: isize) -> T {
    if i < 0 || i as usize >= values.len() {
        T::default()
    } else {
        values[i as usize]
    }
}

/// Linear interpolation of `values` (sampled on `grid`) at `x`.
pub fn linear<T>(grid: &Grid1D, values: &[T], x: f64) -> T
where
    T: Copy + Default + Add<Output = T> + Mul<f64, Output = T>,
{
    match split(grid.fractional_index(x), values.len()) {
        None => T::default(),
        Some((i0, t)) => sample(values, i0) * (1.0 - t) + sample(values, i0 + 1) * t,
    }
}

/// Bilinear interpolation of a row-major `rows.n() × cols.n()` array.
pub fn bilinear<T>(rows: &Grid1D, cols: &Grid1D, values: &[T], r: f64, c: f64) -> T
where
    T: Copy + Default + Add<Output = T> + Mul<f64, Output = T>,
{
    let (nr, nc) = (rows.n(), cols.n());
    let Some((i0, tr)) = split(rows.fractional_index(r), nr) else {
        return T::default();
    };
    let Some((j0, tc)) = split(cols.fractional_index(c), nc) else {
        return T::default();
    };
    let at = |i: isize, j: isize| -> T {
        if i < 0 || j < 0 || i as usize >= nr || j as usize >= nc {
            T::default()
        } else {
            values[i as usize * nc + j as usize]
        }
    };
    let top = at(i0, j0) * (1.0 - tc) + at(i0, j0 + 1) * tc;
    let bottom = at(i0 + 1, j0) * (1.0 - tc) + at(i0 + 1, j0 + 1) * tc;
    top * (1.0 - tr) + bottom * tr
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn linear_hits_samples_and_midpoints() {
        let g = Grid1D::new(4, 0.0, 4.0).unwrap();
        let v = [0.0, 1.0, 4.0, 9.0];
        assert_eq!(linear(&g, &v, 2.0), 4.0);
        assert_eq!(linear(&g, &v, 1.5), 2.5);
        assert_eq!(linear(&g, &v, -0.5), 0.0);
        assert_eq!(linear(&g, &v, 3.5), 4.5);
        assert_eq!(linear(&g, &v, 7.0), 0.0);
    }

    #[test]
    fn bilinear_is_exact_on_affine_data() {
        let g = Grid1D::new(5, 0.0, 5.0).unwrap();
        let v: Vec<f64> = (0..25).map(|k| (k / 5) as f64 * 2.0 + (k % 5) as f64).collect();
        let got = bilinear(&g, &g, &v, 1.25, 2.5);
        assert!((got - (2.5 + 2.5)).abs() < 1e-12);
    }
}
