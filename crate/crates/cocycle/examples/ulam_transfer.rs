//! Project interval maps onto a cell partition and work with the
//! resulting stochastic matrices: the angle-doubling map preserves length
//! measure, so its discretized transfer operator fixes the uniform
//! density exactly, and the adjoint pairing identity holds to rounding.

use cocycle::{ulam_matrix, Density, Partition, PiecewiseMap, UlamOptions, Weights};
use nalgebra::DVector;

fn main() -> cocycle::Result<()> {
    let doubling = PiecewiseMap::doubling();
    let partition = Partition::new(64)?;
    let opts = UlamOptions::default();
    let m = ulam_matrix(&doubling, &partition, &opts)?;

    // Column sums are exactly 1: mass in, mass out.
    let mut worst_column = 0.0_f64;
    for j in 0..m.dim() {
        let s: f64 = (0..m.dim()).map(|i| m.get(i, j)).sum();
        worst_column = worst_column.max((s - 1.0).abs());
    }
    println!("worst column-sum deviation: {worst_column:.3e}");

    // The uniform density is invariant for the doubling map.
    let uniform = Density::uniform(Weights::uniform(64)?);
    let image = m.apply(&uniform)?;
    println!(
        "||T uniform - uniform||_1 = {:.3e}",
        image.l1_distance(&uniform)
    );
    assert!(image.l1_distance(&uniform) <= 1e-12);

    // Transfer operator and composition-with-the-map are adjoint:
    // integrating g against the pushed density equals integrating g o T
    // against the original, here checked cellwise on the discretization.
    let g = DVector::from_fn(64, |i, _| ((i as f64) / 64.0).sin());
    let lhs: f64 = image
        .masses()
        .iter()
        .zip(g.iter())
        .map(|(m, g)| m * g)
        .sum();
    let pulled = m.adjoint_apply(&g)?;
    let rhs: f64 = uniform
        .masses()
        .iter()
        .zip(pulled.iter())
        .map(|(m, g)| m * g)
        .sum();
    println!("adjoint pairing gap: {:.3e}", (lhs - rhs).abs());
    assert!((lhs - rhs).abs() <= 1e-12);

    // A genuinely non-uniform example: the tripling map composed against
    // a tent-shaped density flattens toward uniform under iteration.
    let tripling = PiecewiseMap::tripling();
    let t = ulam_matrix(&tripling, &partition, &opts)?;
    let tent = Density::from_values(
        &DVector::from_fn(64, |i, _| {
            let x = (i as f64 + 0.5) / 64.0;
            1.0 - (2.0 * x - 1.0).abs() + 0.05
        }),
        Weights::uniform(64)?,
    )?;
    let mut f = tent;
    for step in 0..6 {
        println!(
            "tripling iterate {step}: distance to uniform {:.3e}",
            f.l1_distance(&uniform)
        );
        f = t.apply(&f)?;
    }
    Ok(())
}
