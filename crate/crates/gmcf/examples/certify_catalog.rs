//! Build every initial datum in the catalog on a common grid and print its
//! certificate: the inner-region minimum of the area-decreasing quantity p,
//! the largest singular value of Df, and the conical deviation ratio.
//!
//! The shear map sits exactly on the area-preserving boundary (p = 0), the
//! sin-log graph is the classic datum with no tangent cone at infinity, and
//! the rest are strictly area decreasing at this scale.

use gmcf::grid::build_grid;
use gmcf::initialdata::{build_initial, InitialKind, InitialSpec};

fn main() {
    let grid = build_grid(2, 65, 8.0, 1.0).expect("grid");

    let catalog: Vec<(&str, InitialSpec)> = vec![
        (
            "linear 0.3 I",
            InitialSpec::new(InitialKind::Linear {
                coeffs: vec![0.3, 0.0, 0.0, 0.3],
            }),
        ),
        (
            "cone2theta beta=0.2",
            InitialSpec::new(InitialKind::Cone2Theta { beta: 0.2 }),
        ),
        ("sinlog", InitialSpec::new(InitialKind::SinLog)),
        (
            "bowl-like scale=0.5",
            InitialSpec::new(InitialKind::BowlLike { scale: 0.5 }),
        ),
        ("shear a=0.5", InitialSpec::new(InitialKind::Shear { a: 0.5 })),
        (
            "bump a=0.5 k=(1,1)",
            InitialSpec::new(InitialKind::Bump {
                a: 0.5,
                k: vec![1.0, 1.0],
            }),
        ),
    ];

    println!("{:<22} {:>10} {:>12} {:>14}", "datum", "min p", "max lambda", "conical ratio");
    for (name, spec) in &catalog {
        // No epsilon enforcement here; this is a survey, not a gate.
        let (_, cert) = build_initial(spec, &grid, 2, f64::NEG_INFINITY, 0.5).expect(name);
        println!(
            "{:<22} {:>10.5} {:>12.5} {:>14.5}",
            name, cert.min_p, cert.max_lambda, cert.conical_ratio
        );
    }
}
