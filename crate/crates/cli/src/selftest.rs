//! Quick numerical checks against independent oracles.

use std::f64::consts::PI;
use std::io::Write;

use lis_core::geometry::{dirichlet_sum, steering_vector};
use lis_core::powerctl::{brute_force_allocation, closed_form_allocation, solve_allocation};
use lis_core::precoding::{interference_gain, interference_gain_direct, zf_precoders};
use lis_core::scenarios::DropRng;
use lis_core::{AllocationProblem, ArrayGeometry, Column, Direction, ResultTable, TableFormat, UtilityKind};

struct Check {
    name: &'static str,
    worst: f64,
    tolerance: f64,
}

fn random_direction(rng: &mut DropRng) -> lis_core::Result<Direction> {
    let phi = rng.next_azimuth();
    let theta = rng.next_azimuth();
    Direction::new(phi, theta)
}

fn random_geometry(rng: &mut DropRng, max_side: u64) -> lis_core::Result<ArrayGeometry> {
    let rows = 1 + (rng.next_u64() % max_side) as usize;
    let cols = 1 + (rng.next_u64() % max_side) as usize;
    let spacing = 0.1 + rng.next_open_unit();
    ArrayGeometry::normalized(rows, cols, spacing)
}

fn dirichlet(rng: &mut DropRng) -> f64 {
    let mut worst: f64 = 0.0;
    for _ in 0..500 {
        let n = 1 + (rng.next_u64() % 200) as usize;
        let a = (rng.next_open_unit() - 0.5) * 8.0;
        let literal: num_like::C = (0..n)
            .map(|k| num_like::C::cis(2.0 * PI * k as f64 * a))
            .fold(num_like::C::ZERO, num_like::C::add);
        let closed = dirichlet_sum(n, a);
        worst = worst.max(((closed.re - literal.re).powi(2) + (closed.im - literal.im).powi(2)).sqrt());
    }
    worst
}

/// Minimal complex arithmetic so the oracle shares no code with the library.
mod num_like {
    #[derive(Clone, Copy)]
    pub struct C {
        pub re: f64,
        pub im: f64,
    }

    impl C {
        pub const ZERO: C = C { re: 0.0, im: 0.0 };

        pub fn cis(t: f64) -> C {
            C { re: t.cos(), im: t.sin() }
        }

        pub fn add(self, o: C) -> C {
            C { re: self.re + o.re, im: self.im + o.im }
        }
    }
}

fn steering_norm(rng: &mut DropRng) -> lis_core::Result<f64> {
    let mut worst: f64 = 0.0;
    for _ in 0..50 {
        let geom = random_geometry(rng, 100)?;
        let a = steering_vector(&geom, &random_direction(rng)?);
        let nm = geom.elements() as f64;
        worst = worst.max((a.norm_sqr() - nm).abs() / nm);
    }
    Ok(worst)
}

fn factorized_gain(rng: &mut DropRng) -> lis_core::Result<f64> {
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let geom = random_geometry(rng, 60)?;
        let (d1, d2) = (random_direction(rng)?, random_direction(rng)?);
        worst = worst.max((interference_gain(&geom, &d1, &d2) - interference_gain_direct(&geom, &d1, &d2)).abs());
    }
    Ok(worst)
}

fn zf_nulls(rng: &mut DropRng) -> lis_core::Result<f64> {
    let mut worst: f64 = 0.0;
    let geom = ArrayGeometry::normalized(16, 16, 0.5)?;
    let scale = (geom.elements() as f64).sqrt();
    for _ in 0..20 {
        let dirs = (0..4).map(|_| random_direction(rng)).collect::<lis_core::Result<Vec<_>>>()?;
        let Ok(precoders) = zf_precoders(&geom, &dirs) else { continue };
        for (k, v) in precoders.iter().enumerate() {
            for (i, d) in dirs.iter().enumerate() {
                if i != k {
                    worst = worst.max(v.response(&steering_vector(&geom, d)).norm() / scale);
                }
            }
        }
    }
    Ok(worst)
}

fn random_problem(rng: &mut DropRng, users: usize) -> lis_core::Result<AllocationProblem> {
    let gains = (0..users).map(|_| 0.05 + rng.next_open_unit()).collect();
    let costs = (0..users).map(|_| 0.1 + 2.0 * rng.next_open_unit()).collect();
    AllocationProblem::new(gains, costs, 1.0 + 4.0 * rng.next_open_unit())
}

fn closed_forms(rng: &mut DropRng) -> lis_core::Result<f64> {
    let mut worst: f64 = 0.0;
    for _ in 0..200 {
        let users = 1 + (rng.next_u64() % 6) as usize;
        let p = random_problem(rng, users)?;
        for u in UtilityKind::NAMED {
            let generic = solve_allocation(&p, &u)?;
            let closed = closed_form_allocation(&p, &u).expect("named utility");
            for (g, c) in generic.powers.iter().zip(&closed.powers) {
                if *c > 0.0 {
                    worst = worst.max((g - c).abs() / c);
                } else {
                    worst = worst.max(g.abs());
                }
            }
        }
    }
    Ok(worst)
}

/// Largest amount by which the grid oracle beats the solver.
fn grid_oracle(rng: &mut DropRng) -> lis_core::Result<f64> {
    let mut worst: f64 = 0.0;
    for _ in 0..10 {
        let p = random_problem(rng, 2)?;
        for u in UtilityKind::NAMED {
            let solved = closed_form_allocation(&p, &u).expect("named utility");
            let grid = brute_force_allocation(&p, &u, 1e-3 * p.budget())?;
            let ours = solved.utility(&u).unwrap_or(f64::NEG_INFINITY);
            let best = grid.utility(&u).unwrap_or(f64::NEG_INFINITY);
            if best.is_finite() {
                worst = worst.max(best - ours);
            }
        }
    }
    Ok(worst)
}

fn table_round_trip(rng: &mut DropRng) -> lis_core::Result<f64> {
    let values: Vec<f64> = (0..200).map(|_| f64::from_bits(rng.next_u64() >> 2)).collect();
    let t = ResultTable::new().with_column("x", Column::Float(values))?;
    let text = String::from_utf8(t.to_bytes(TableFormat::Csv)?).expect("utf-8");
    Ok(if ResultTable::from_csv(&text)? == t { 0.0 } else { 1.0 })
}

/// Runs every check, writes one line per check, and reports whether all passed.
pub fn run(out: &mut impl Write) -> lis_core::Result<bool> {
    let mut rng = DropRng::for_drop(0x5e1f_7e57, 0);
    let checks = [
        Check { name: "dirichlet closed form vs literal sum", worst: dirichlet(&mut rng), tolerance: 1e-9 },
        Check { name: "steering vector norm", worst: steering_norm(&mut rng)?, tolerance: 1e-9 },
        Check { name: "factorized vs direct interference gain", worst: factorized_gain(&mut rng)?, tolerance: 1e-10 },
        Check { name: "zf nulls other users", worst: zf_nulls(&mut rng)?, tolerance: 1e-9 },
        Check { name: "closed-form vs generic allocation", worst: closed_forms(&mut rng)?, tolerance: 1e-8 },
        Check { name: "solver vs grid oracle", worst: grid_oracle(&mut rng)?, tolerance: 1e-9 },
        Check { name: "csv round trip", worst: table_round_trip(&mut rng)?, tolerance: 0.0 },
    ];
    let mut all = true;
    for c in &checks {
        let pass = c.worst <= c.tolerance;
        all &= pass;
        writeln!(out, "{} {} (worst {:.3e}, tolerance {:.0e})", if pass { "PASS" } else { "FAIL" }, c.name, c.worst, c.tolerance)?;
    }
    Ok(all)
}
