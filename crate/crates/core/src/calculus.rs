//! Discrete differential operators on weighted graphs.

use crate::field::Field;
use crate::space::GraphSpace;

/// True when `x` and all its neighbours lie in `mask`.
#[inline]
pub fn stencil_complete(space: &GraphSpace, mask: &[bool], x: usize) -> bool {
    mask[x] && space.neighbors(x).all(|(y, _, _)| mask[y])
}

fn vertexwise(space: &GraphSpace, f: &Field, op: impl Fn(usize) -> f64) -> Field {
    let n = space.len();
    let mut values = vec![f64::NAN; n];
    let mut mask = vec![false; n];
    for x in 0..n {
        if stencil_complete(space, f.mask(), x) {
            values[x] = op(x);
            mask[x] = true;
        }
    }
    Field::new(values, mask).expect("finite operator output")
}

/// `(1/μ(x)) Σ_y w_xy (f(y) - f(x))`, defined where the stencil is complete.
pub fn laplacian(space: &GraphSpace, f: &Field) -> Field {
    vertexwise(space, f, |x| {
        let fx = f.value(x);
        space
            .neighbors(x)
            .map(|(y, w, _)| w * (f.value(y) - fx))
            .sum::<f64>()
            / space.measure(x)
    })
}

/// `sqrt(Σ_y w_xy (f(y) - f(x))² / (2 μ(x)))`.
pub fn gradient_norm(space: &GraphSpace, f: &Field) -> Field {
    vertexwise(space, f, |x| gradient_norm_at(space, f, x))
}

#[inline]
pub fn gradient_norm_at(space: &GraphSpace, f: &Field, x: usize) -> f64 {
    let fx = f.value(x);
    let s: f64 = space
        .neighbors(x)
        .map(|(y, w, _)| {
            let d = f.value(y) - fx;
            w * d * d
        })
        .sum();
    (s / (2.0 * space.measure(x))).sqrt()
}

/// `Σ_y w_xy (f(y) - f(x)) (g(y) - g(x)) / (2 μ(x))`.
pub fn gradient_inner(space: &GraphSpace, f: &Field, g: &Field) -> Field {
    let both = Field::new(
        f.values().to_vec(),
        (0..f.len()).map(|x| f.defined(x) && g.defined(x)).collect(),
    )
    .expect("finite");
    vertexwise(space, &both, |x| {
        let (fx, gx) = (f.value(x), g.value(x));
        space
            .neighbors(x)
            .map(|(y, w, _)| w * (f.value(y) - fx) * (g.value(y) - gx))
            .sum::<f64>()
            / (2.0 * space.measure(x))
    })
}

/// `Σ_edges w (f(a) - f(b))²` over edges with both ends defined (and in `region`, if given).
///
/// Each undirected edge is counted once, so this is half the ordered-pair sum.
pub fn dirichlet_energy(space: &GraphSpace, f: &Field, region: Option<&[bool]>) -> f64 {
    space
        .edges()
        .iter()
        .filter(|e| f.defined(e.a) && f.defined(e.b))
        .filter(|e| region.is_none_or(|r| r[e.a] && r[e.b]))
        .map(|e| {
            let d = f.value(e.a) - f.value(e.b);
            e.weight * d * d
        })
        .sum()
}
