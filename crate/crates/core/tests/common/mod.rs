#![allow(dead_code)]

pub const CAPUTO_ALPHAS: [f64; 4] = [0.3, 0.5, 0.7, 0.9];
pub const CAPUTO_NS: [usize; 5] = [250, 500, 1000, 2000, 4000];
/// Reference errors, one row per order.
pub const CAPUTO_ERRORS: [[f64; 5]; 4] = [
    [3.89e-06, 5.72e-07, 8.36e-08, 1.22e-08, 1.80e-09],
    [2.25e-05, 3.98e-06, 6.99e-07, 1.23e-07, 2.15e-08],
    [9.30e-05, 1.91e-05, 3.91e-06, 7.96e-07, 1.62e-07],
    [3.19e-04, 7.58e-05, 1.78e-05, 4.18e-06, 9.78e-07],
];
pub const CAPUTO_ORDERS: [[f64; 4]; 4] = [
    [2.77, 2.77, 2.77, 2.77],
    [2.50, 2.51, 2.51, 2.51],
    [2.28, 2.29, 2.30, 2.30],
    [2.07, 2.09, 2.09, 2.10],
];

pub const TFCH_ALPHAS: [f64; 4] = [0.3, 0.5, 0.7, 0.9];
pub const TFCH_NS: [usize; 4] = [15, 18, 21, 24];
pub const TFCH_N0: usize = 200;
pub const TFCH_M: usize = 60;
pub const TFCH_ERRORS: [[f64; 4]; 4] = [
    [6.09e-07, 3.66e-07, 2.40e-07, 1.68e-07],
    [1.77e-06, 1.12e-06, 7.54e-07, 5.40e-07],
    [2.50e-06, 1.62e-06, 1.13e-06, 8.18e-07],
    [1.30e-06, 8.84e-07, 6.36e-07, 7.76e-07],
];
pub const TFCH_ORDERS: [[f64; 3]; 4] = [
    [2.796, 2.738, 2.677],
    [2.522, 2.547, 2.498],
    [2.369, 2.382, 2.387],
    [2.130, 2.139, 2.160],
];

/// Composite Simpson rule with `panels` (even) subintervals.
pub fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, panels: usize) -> f64 {
    let h = (b - a) / panels as f64;
    let mut s = f(a) + f(b);
    for i in 1..panels {
        s += f(a + i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
    }
    s * h / 3.0
}
