//! Centered-cell lattice arithmetic.
//!
//! The layer is periodic with period `epsilon` and cells centred on the
//! lattice `epsilon * Z`; the reference cell is `(-1/2, 1/2)`.  A point `t`
//! (already divided by `epsilon`) splits into an integer cell index and a
//! fractional part in `[-1/2, 1/2)`.

/// Integer cell index of `t`, rounding to nearest with half-up tie break.
///
/// `cell_index(0.5) == 1`, `cell_index(-0.5) == 0`, `cell_index(1.49) == 1`.
pub fn cell_index(t: f64) -> i64 {
    (t + 0.5).floor() as i64
}

/// Fractional part of `t` relative to its cell centre, in `[-1/2, 1/2)`.
pub fn cell_frac(t: f64) -> f64 {
    t - cell_index(t) as f64
}

/// Cell index in two components.
pub fn cell_index2(t: [f64; 2]) -> [i64; 2] {
    [cell_index(t[0]), cell_index(t[1])]
}

/// Fractional part in two components.
pub fn cell_frac2(t: [f64; 2]) -> [f64; 2] {
    [cell_frac(t[0]), cell_frac(t[1])]
}
