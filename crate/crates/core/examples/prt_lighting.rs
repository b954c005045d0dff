//! Shades a surface point under a sky map with precomputed radiance transfer
//! and checks every estimate against brute-force quadrature.

use darkbench::render::{
    diffuse_ibl, prt_shaded, render_oracle, transport_to_sh, Direction, EnvMap, Occluder,
    SurfacePoint,
};
use darkbench::RngSeed;

fn main() -> darkbench::Result<()> {
    let sun = Direction::from_spherical(0.6, 1.0);
    let sky = EnvMap::from_fn(128, 64, 3, |d, c| {
        let blue = [0.3, 0.5, 0.9][c] * d.z().max(0.0);
        let disc = if d.dot(&sun) > 0.97 { [20.0, 18.0, 14.0][c] } else { 0.0 };
        0.05 + blue + disc
    })?;
    let env_sh = sky.project_sh(8);

    let normal = Direction::new(0.3, 0.2, 0.93)?;
    let open = SurfacePoint::new(normal, 0.8);
    let shaded = open
        .clone()
        .with_occluder(Occluder::from_degrees(Direction::new(0.5, 0.6, 0.6)?, 25.0));

    for (label, p) in [("unoccluded", &open), ("with occluder", &shaded)] {
        let oracle = render_oracle(&sky, p, 256)?;
        println!("{label}: oracle rgb {:.4} {:.4} {:.4}", oracle[0], oracle[1], oracle[2]);
        let t = transport_to_sh(p, 8, 1_000_000, RngSeed(1))?;
        for order in [1, 2, 4, 6, 8] {
            let e: Vec<_> = env_sh.iter().map(|e| e.truncate(order)).collect();
            let v = prt_shaded(&t.truncate(order), &e, &p.albedo)?;
            let err = v
                .iter()
                .zip(&oracle)
                .map(|(a, b)| (a - b).abs() / b)
                .fold(0.0, f64::max);
            println!("  order {order}: rgb {:.4} {:.4} {:.4}  worst rel err {err:.4}", v[0], v[1], v[2]);
        }
    }

    let unit = EnvMap::constant(64, 32, 1, 1.0)?;
    let v = diffuse_ibl(&unit, &SurfacePoint::new(normal, 0.8), 256)?;
    println!("constant unit sky, albedo 0.8: {:.6}", v[0]);
    Ok(())
}
