//! Acceptance suite: one test per shipped guarantee, each pinning solver
//! output against a closed form or a structural property and printing a
//! single PASS line with the measured figures.

use std::sync::Arc;
use std::time::Instant;

use cma_core::geodesics::{geodesic_path, uniqueness_experiment};
use cma_core::{
    beta_default, bishop_bound, capacity_sublevel_check, energy, f_value, lambda1,
    liouville_iterate, mt_check, mt_solvable_bound, ricci_iterate, ricci_step, sweep_t_max,
    t_sweep, volume_capacity_fit, DomainSpec, GridPotential2D, PlanarDomain, RadialGrid,
    RadialPotential,
};

/// Radius at which the Fubini-Study profile solves the t = 1 equation.
fn star_radius(n: usize) -> f64 {
    1.0 / ((2 * n + 1) as f64).sqrt()
}

fn grid(n: usize, radius: f64, nodes: usize) -> Arc<RadialGrid> {
    Arc::new(RadialGrid::uniform(n, radius, nodes).unwrap())
}

/// phi*(r) = (n+1) log((1+r^2)/(1+R*^2)) evaluated at r.
fn star_profile(n: usize, r: f64) -> f64 {
    let rs = star_radius(n);
    (n + 1) as f64 * ((1.0 + r * r) / (1.0 + rs * rs)).ln()
}

#[test]
fn criterion_01_radial_exact_recovery() {
    let mut sups = Vec::new();
    for n in [1usize, 2] {
        let start = Instant::now();
        let g = grid(n, star_radius(n), 4096);
        let phi0 = RadialPotential::zero(g.clone());
        let (phi, trace) = ricci_iterate(&phi0, 1.0, 1.0e-10, 200).unwrap();
        assert!(trace.converged, "n = {n}: no convergence in 200 iterations");
        let sup = g
            .nodes()
            .iter()
            .zip(phi.values())
            .map(|(&r, &v)| (v - star_profile(n, r)).abs())
            .fold(0.0_f64, f64::max);
        assert!(sup <= 1.0e-6, "n = {n}: sup error {sup:.3e} exceeds 1e-6");
        let secs = start.elapsed().as_secs_f64();
        assert!(secs < 5.0, "n = {n}: solve took {secs:.2}s");
        sups.push((n, sup, trace.iterations, secs));
    }
    let detail: Vec<String> = sups
        .iter()
        .map(|(n, s, it, secs)| format!("n={n} sup={s:.2e} iters={it} {secs:.2}s"))
        .collect();
    println!("criterion 01 (radial exact recovery): PASS — {}", detail.join(", "));
}

#[test]
fn criterion_02_first_iterate_identity() {
    let mut sups = Vec::new();
    for n in [1usize, 2, 3] {
        let start = Instant::now();
        let g = grid(n, 1.0, 65537);
        let zero = RadialPotential::zero(g.clone());
        let step = ricci_step(&zero, 1.0).unwrap();
        let unif = RadialPotential::paraboloid(g.clone());
        let sup = step.sup_diff(&unif).unwrap();
        assert!(sup <= 1.0e-8, "n = {n}: sup error {sup:.3e} exceeds 1e-8");
        let secs = start.elapsed().as_secs_f64();
        assert!(secs < 1.0, "n = {n}: step took {secs:.2}s");
        sups.push(format!("n={n} sup={sup:.2e}"));
    }
    println!("criterion 02 (first iterate is the uniform solution): PASS — {}", sups.join(", "));
}

#[test]
fn criterion_03_functional_values() {
    for n in [1usize, 2, 3] {
        let g = grid(n, 0.8, 16385);
        let unif = RadialPotential::paraboloid(g);
        let e = energy(&unif).unwrap();
        let expected = -1.0 / (2.0 * ((n + 1) as f64).powi(2));
        assert!(
            (e - expected).abs() <= 1.0e-8,
            "n = {n}: E(unif) = {e:.12} vs {expected:.12}"
        );
    }

    let g = grid(1, 1.0, 16385);
    let unif = RadialPotential::paraboloid(g);
    let f_unif = f_value(&unif, 1.0).unwrap();
    // -1/8 + log(2 (sqrt(e) - 1)).
    let expected_unif = -0.125 + 0.2603950509927567;
    assert!(
        (f_unif - expected_unif).abs() <= 1.0e-7,
        "F(unif) = {f_unif:.12} vs {expected_unif:.12}"
    );

    let g = grid(1, star_radius(1), 16385);
    let star = RadialPotential::fubini_study(g);
    let f_star = f_value(&star, 1.0).unwrap();
    // E(phi*) + log(4/3).
    let expected_star = -0.1507282898071236 + (4.0_f64 / 3.0).ln();
    assert!(
        (f_star - expected_star).abs() <= 1.0e-5,
        "F(phi*) = {f_star:.12} vs {expected_star:.12}"
    );
    println!(
        "criterion 03 (functional values): PASS — F(unif)={f_unif:.9}, F(phi*)={f_star:.9}"
    );
}

#[test]
fn criterion_04_trace_monotonicity() {
    let mut converged = 0usize;
    let mut total = 0usize;
    for n in [1usize, 2] {
        for radius in [0.3, star_radius(n), 0.9] {
            for t in [0.5, 1.0] {
                total += 1;
                let g = grid(n, radius, 1025);
                let phi0 = RadialPotential::zero(g);
                let Ok((_, trace)) = ricci_iterate(&phi0, t, 1.0e-9, 500) else {
                    continue;
                };
                if !trace.converged {
                    continue;
                }
                converged += 1;
                assert!(
                    trace.f_monotone_within(1.0e-10),
                    "non-monotone F at n = {n}, R = {radius}, t = {t}"
                );
            }
        }
    }
    assert!(converged >= 1, "no run in the matrix converged");
    println!(
        "criterion 04 (F monotone along every trace): PASS — {converged}/{total} runs converged, all monotone"
    );
}

#[test]
fn criterion_05_moser_trudinger_family() {
    let g = grid(1, star_radius(1), 2049);
    let beta = 0.9;
    let mut members = Vec::new();
    for base in [RadialPotential::paraboloid(g.clone()), RadialPotential::fubini_study(g.clone())] {
        for k in 0..=16 {
            let s = 8.0 * k as f64 / 16.0;
            members.push(base.scaled(s).unwrap());
        }
    }
    let mut fitted = 0.0_f64;
    for phi in &members {
        let verdict = mt_check(phi, beta, None).unwrap();
        fitted = fitted.max(verdict.fitted_constant.unwrap());
    }
    assert!(fitted.is_finite() && fitted > 0.0, "fitted constant {fitted} not finite");
    let mut min_slack = f64::INFINITY;
    for phi in &members {
        let verdict = mt_check(phi, beta, Some(fitted)).unwrap();
        assert!(verdict.holds, "member fails with fitted C: slack {:.3e}", verdict.slack);
        min_slack = min_slack.min(verdict.slack);
    }
    println!(
        "criterion 05 (Moser-Trudinger over the scaled family): PASS — C={fitted:.6}, min slack={min_slack:.2e}"
    );
}

#[test]
fn criterion_06_geodesic_properties() {
    let g = grid(1, star_radius(1), 4097);
    let unif = RadialPotential::paraboloid(g.clone());
    let star = RadialPotential::fubini_study(g);

    let chord_deviation = |s_nodes: usize| -> (f64, f64) {
        let path = geodesic_path(&unif, &star, 16, s_nodes).unwrap();
        assert!(path.samples[0] == path.u0 && path.samples[16] == path.u1, "endpoints differ");
        let es: Vec<f64> = path.samples.iter().map(|u| u.energy()).collect();
        let (e0, e1) = (es[0], es[16]);
        let dev = path
            .ts
            .iter()
            .zip(&es)
            .map(|(&t, &e)| (e - ((1.0 - t) * e0 + t * e1)).abs())
            .fold(0.0_f64, f64::max);
        let fs: Vec<f64> = path.samples.iter().map(|u| u.f_value()).collect();
        let d2 = fs
            .windows(3)
            .map(|w| w[2] - 2.0 * w[1] + w[0])
            .fold(f64::NEG_INFINITY, f64::max);
        (dev, d2)
    };

    let (dev_coarse, d2) = chord_deviation(2048);
    assert!(dev_coarse <= 5.0e-4, "E chord deviation {dev_coarse:.3e} exceeds 5e-4");
    assert!(d2 <= 1.0e-6, "F second difference {d2:.3e} exceeds 1e-6");
    let (dev_fine, _) = chord_deviation(4096);
    let ratio = dev_coarse / dev_fine;
    assert!(ratio >= 3.0, "refinement ratio {ratio:.2} below 3");
    println!(
        "criterion 06 (geodesic E affine, F concave): PASS — dev={dev_coarse:.2e}, ratio={ratio:.2}, max d2F={d2:.2e}"
    );
}

#[test]
fn criterion_07_uniqueness_across_starts() {
    let mut figures = Vec::new();
    for (n, radius, tol) in [(1usize, star_radius(1), 1.0e-7), (2, 0.4, 1.0e-6)] {
        let g = grid(n, radius, 1025);
        let unif = RadialPotential::paraboloid(g.clone());
        let starts = vec![
            RadialPotential::zero(g.clone()),
            unif.scaled(0.5).unwrap(),
            unif,
        ];
        let report = uniqueness_experiment(&starts, tol, 3000).unwrap();
        assert!(
            report.passes && report.max_pairwise <= tol,
            "n = {n}: pairwise distance {:.3e} exceeds {tol:.0e}",
            report.max_pairwise
        );
        figures.push(format!("n={n} pairwise={:.2e}", report.max_pairwise));
    }
    println!("criterion 07 (limit independent of start): PASS — {}", figures.join(", "));
}

#[test]
fn criterion_08_planar_cross_validation() {
    let radius = star_radius(1);
    let reference = {
        let g = grid(1, radius, 8193);
        let phi0 = RadialPotential::zero(g);
        ricci_iterate(&phi0, 1.0, 1.0e-11, 400).unwrap().0
    };
    let radial_at = |r: f64| -> f64 {
        let nodes = reference.grid().nodes();
        let v = reference.values();
        let h = nodes[1] - nodes[0];
        let i = ((r / h) as usize).min(nodes.len() - 2);
        let w = (r - nodes[i]) / h;
        v[i] * (1.0 - w) + v[i + 1] * w
    };

    let planar_sup = |grid_size: usize| -> f64 {
        let domain = PlanarDomain::build(DomainSpec::disc(radius), grid_size).unwrap();
        let (phi, trace) = liouville_iterate(&domain, 1.0, 1.0e-9, 200).unwrap();
        assert!(trace.converged, "planar disc run at grid {grid_size} did not converge");
        (0..domain.interior_count())
            .map(|k| {
                let (x, y) = domain.position(k);
                (phi.values()[k] - radial_at(x.hypot(y))).abs()
            })
            .fold(0.0_f64, f64::max)
    };

    let sup_coarse = planar_sup(128);
    assert!(sup_coarse <= 1.0e-3, "sup difference {sup_coarse:.3e} exceeds 1e-3");
    let sup_fine = planar_sup(256);
    let ratio = sup_coarse / sup_fine;
    assert!(ratio >= 3.5, "refinement ratio {ratio:.2} below 3.5");

    for spec in [DomainSpec::rect(1.0, 1.0), DomainSpec::ellipse(0.5, 0.3)] {
        let domain = PlanarDomain::build(spec, 48).unwrap();
        let (_, trace) = liouville_iterate(&domain, 1.0, 1.0e-8, 200).unwrap();
        assert!(trace.converged, "non-disc run did not converge");
        assert!(trace.f_monotone_within(1.0e-9), "non-disc run has non-monotone F");
    }
    println!(
        "criterion 08 (planar matches radial): PASS — sup={sup_coarse:.2e}, ratio={ratio:.2}, square+ellipse monotone"
    );
}

#[test]
fn criterion_09_spectral_criterion() {
    // Constant weight: the paraboloid has discrete Laplacian exactly 2, so
    // lambda1 discretizes the first Dirichlet eigenvalue of -Laplacian / 2.
    let domain = PlanarDomain::build(DomainSpec::disc(1.0), 128).unwrap();
    let values: Vec<f64> = (0..domain.interior_count())
        .map(|k| {
            let (x, y) = domain.position(k);
            (x * x + y * y - 1.0) / 2.0
        })
        .collect();
    let phi = GridPotential2D::new(domain, values).unwrap();
    let lambda = lambda1(&phi).unwrap();
    let j01 = 2.404825557695773_f64;
    let expected = j01 * j01 / 2.0;
    let rel = (lambda / expected - 1.0).abs();
    assert!(rel <= 5.0e-4, "lambda1 = {lambda:.6} vs {expected:.6} (rel {rel:.2e})");

    let radius = star_radius(1);
    let domain = PlanarDomain::build(DomainSpec::disc(radius), 96).unwrap();
    let values: Vec<f64> = (0..domain.interior_count())
        .map(|k| {
            let (x, y) = domain.position(k);
            star_profile(1, x.hypot(y))
        })
        .collect();
    let phi = GridPotential2D::new(domain, values).unwrap();
    let lambda_star = lambda1(&phi).unwrap();
    assert!(lambda_star > 1.0, "lambda1 of the critical metric is {lambda_star:.6}");
    println!(
        "criterion 09 (spectral): PASS — constant-weight lambda={lambda:.6} (rel {rel:.1e}), critical lambda={lambda_star:.4}"
    );
}

#[test]
fn criterion_10_bounds_table() {
    let table = [(1usize, 4.0), (2, 6.9282), (3, 9.2832)];
    for (n, expected) in table {
        let b = bishop_bound(n).unwrap();
        assert!((b - expected).abs() <= 5.0e-5, "bishop({n}) = {b:.6} vs {expected}");
    }
    let mt = mt_solvable_bound(1).unwrap();
    assert!((mt - 16.0).abs() <= 1.0e-12, "mt bound {mt}");
    assert!(beta_default(1) > 0.0 && beta_default(1) < 1.0);

    let t_grid: Vec<f64> = (1..=12).map(|k| 0.5 * k as f64).collect();
    let entries = t_sweep(1, star_radius(1), 513, &t_grid, 1.0e-8, 300, 2).unwrap();
    let t_max = sweep_t_max(&entries).expect("at least one sweep run converges");
    assert!(
        (1.0..=4.5).contains(&t_max),
        "breakdown t_max = {t_max} outside [1, 4.5]"
    );
    println!("criterion 10 (bounds table and sweep): PASS — t_max={t_max}");
}

#[test]
fn criterion_11_capacity_suite() {
    for n in [1usize, 2] {
        let g = grid(n, star_radius(n), 4097);
        let star = RadialPotential::fubini_study(g.clone());
        let unif = RadialPotential::paraboloid(g);
        for phi in [&star, &unif] {
            for t in [0.05, 0.1, 0.3] {
                let verdict = capacity_sublevel_check(phi, t).unwrap();
                assert!(
                    verdict.holds,
                    "capacity bound fails at n = {n}, t = {t}: lhs {:.4e} rhs {:.4e}",
                    verdict.lhs, verdict.rhs
                );
            }
        }
        let rhos: Vec<f64> = (1..=24).map(|k| 0.04 * k as f64 * star_radius(n)).collect();
        let c = volume_capacity_fit(n, star_radius(n), 2.0 * n as f64, &rhos).unwrap();
        assert!((c - 1.0).abs() <= 1.0e-12, "n = {n}: fitted C = {c:.15}");
    }
    println!("criterion 11 (capacity suite): PASS");
}
