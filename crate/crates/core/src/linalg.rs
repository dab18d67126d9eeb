//! Small fixed-size vector helpers shared by the numeric modules.

use crate::{Matrix25, Vector25, DIM};

pub(crate) fn dot(a: &Vector25, b: &Vector25) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn norm(a: &Vector25) -> f64 {
    dot(a, a).sqrt()
}

pub(crate) fn scaled(a: &Vector25, s: f64) -> Vector25 {
    let mut out = *a;
    for x in &mut out {
        *x *= s;
    }
    out
}

/// `dest += s * src`
pub(crate) fn add_scaled(dest: &mut Vector25, src: &Vector25, s: f64) {
    for (d, x) in dest.iter_mut().zip(src) {
        *d += s * x;
    }
}

pub(crate) fn sub(a: &Vector25, b: &Vector25) -> Vector25 {
    let mut out = *a;
    for (x, y) in out.iter_mut().zip(b) {
        *x -= y;
    }
    out
}

pub(crate) fn matvec(m: &Matrix25, v: &Vector25) -> Vector25 {
    let mut out = [0.0; DIM];
    for (o, row) in out.iter_mut().zip(m.iter()) {
        *o = dot(row, v);
    }
    out
}
