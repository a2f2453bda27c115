//! Acceptance suite: one test per criterion, each printing a PASS/FAIL
//! line. Run with `cargo test -p strainreal-cli --test acceptance --
//! --nocapture` to see every line.

use std::path::{Path, PathBuf};
use std::process::Command;
use std::sync::Mutex;
use std::time::Instant;

use strainreal_core::casebook;
use strainreal_core::charfamily::{sensitivity_identity, SmoothField};
use strainreal_core::expr::parse_expression;
use strainreal_core::field::Matrix2;
use strainreal_core::local::{assemble_local_realization, LocalRealizeConfig};
use strainreal_core::wave::{
    amplitude_sweep, periodic_truncate, realize_global, smallest_n_for_disk, solve_wave,
    sweep_system, verify_truncation_on_disk, GlobalConfig, GlobalOutcome, Mollifier, SweepConfig,
};
use strainreal_core::{fd, laminate, quad, ScalarFieldExpr};

// the suite serializes its heavy members so wall-clock budgets hold on
// small machines
static GATE: Mutex<()> = Mutex::new(());

fn check(n: usize, desc: &str, ok: bool, detail: String) {
    if ok {
        println!("ACCEPTANCE {n} PASS: {desc} ({detail})");
    } else {
        println!("ACCEPTANCE {n} FAIL: {desc} ({detail})");
    }
    assert!(ok, "criterion {n} failed: {desc}: {detail}");
}

fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_strainreal")
}

fn tmpdir(tag: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("strainreal_accept_{tag}_{}", std::process::id()));
    let _ = std::fs::remove_dir_all(&dir);
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

fn read_grid_csv(path: &Path) -> Vec<(f64, f64, f64)> {
    let text = std::fs::read_to_string(path).unwrap();
    text.lines()
        .skip(1)
        .map(|l| {
            let p: Vec<f64> = l.split(',').map(|v| v.parse().unwrap()).collect();
            (p[0], p[1], p[2])
        })
        .collect()
}

#[test]
fn criterion_01_local_worked_example() {
    let _g = GATE.lock().unwrap();
    let dir = tmpdir("c1");
    let t0 = Instant::now();
    let status = Command::new(bin())
        .args([
            "realize",
            "local",
            "--stream",
            "(x^2-y^2)/2",
            "--center",
            "0,0",
            "--nx",
            "257",
            "--out-dir",
        ])
        .arg(&dir)
        .status()
        .unwrap();
    let elapsed = t0.elapsed();
    assert!(status.success());

    let mu = read_grid_csv(&dir.join("mu.csv"));
    let p = read_grid_csv(&dir.join("p.csv"));
    let mu_dev = mu.iter().map(|r| (r.2 - 1.0).abs()).fold(0.0f64, f64::max);
    let p0 = p[0].2;
    let p_dev = p.iter().map(|r| (r.2 - p0).abs()).fold(0.0f64, f64::max);
    let ok = mu_dev <= 1e-8 && p_dev <= 1e-8 && elapsed.as_secs_f64() < 10.0;
    check(
        1,
        "local worked example: mu = 1, p constant at nx = 257 within 10 s",
        ok,
        format!("sup|mu-1| = {mu_dev:.3e}, sup|p-p0| = {p_dev:.3e}, runtime = {elapsed:?}"),
    );
}

#[test]
fn criterion_02_local_convergence() {
    let _g = GATE.lock().unwrap();
    let u = parse_expression("(x^2-y^2)/2 + 0.05*sin(x)*sin(y)").unwrap();
    let hs = [1.0f64 / 64.0, 1.0 / 128.0, 1.0 / 256.0];
    let mut stokes = Vec::new();
    let mut orth = Vec::new();
    let mut taus = Vec::new();
    for &h in &hs {
        let nx = (0.25 / h).round() as usize + 1;
        let cfg = LocalRealizeConfig {
            nx,
            ..Default::default()
        };
        let real = assemble_local_realization(&u, &cfg).unwrap();
        taus.push(real.tau);
        stokes.push(real.report.max_residual);
        orth.push(real.report.orthogonality_residual);
    }
    let stokes_order = fd::fitted_order(&hs, &stokes);
    let orth_order = fd::fitted_order(&hs, &orth);
    let ok = taus.windows(2).all(|w| w[0] == w[1])
        && (1.8..=2.2).contains(&stokes_order)
        && (1.8..=2.2).contains(&orth_order);
    check(
        2,
        "local convergence: curl-div and orthogonality residuals of order 2",
        ok,
        format!(
            "stokes order = {stokes_order:.3} (errs {stokes:?}), \
             orthogonality order = {orth_order:.3} (errs {orth:?})"
        ),
    );
}

#[test]
fn criterion_03_characteristic_identities() {
    let u = parse_expression("(x^2-y^2)/2 + 0.05*sin(x)*sin(y)").unwrap();
    let vf = strainreal_core::VelocityField::from_stream(&u);
    let e = vf.strain();
    // alpha of the local construction for this stream
    let a = e.e12.clone();
    let denom_half = a.clone(); // e12 = (uxx - uyy)/2; a_local = uxy*2/denom
    let _ = denom_half;
    let uxy = u
        .d(strainreal_core::Var::X)
        .d(strainreal_core::Var::Y);
    let denom = u
        .differentiate(strainreal_core::Var::X, 2)
        .sub(&u.differentiate(strainreal_core::Var::Y, 2));
    let a_local = uxy.scale(2.0).div(&denom).simplify();
    let alpha = a_local
        .sub(&a_local.pow(2).add(&ScalarFieldExpr::one()).sqrt_positive())
        .simplify();
    let speed = SmoothField::new(alpha);

    let mut state = 0x5eed5eedu64;
    let mut next = move || {
        state = state
            .wrapping_mul(6364136223846793005)
            .wrapping_add(1442695040888963407);
        (state >> 11) as f64 / (1u64 << 53) as f64
    };
    let mut worst_anchor = 0.0f64;
    let mut worst_pair = 0.0f64;
    for _ in 0..100 {
        let x = 0.4 * next() - 0.2;
        let y = 0.8 * next() - 0.4;
        // at the anchor the sensitivity is exactly one on both routes
        let (s0, e0) = sensitivity_identity(&speed, (x, y), x, 1.0 / 128.0);
        worst_anchor = worst_anchor.max((s0 - 1.0).abs()).max((e0 - 1.0).abs());
        // away from the anchor the two routes agree
        let t = 0.3 * next() - 0.15;
        let (s, ex) = sensitivity_identity(&speed, (x, y), t, 1.0 / 128.0);
        worst_pair = worst_pair.max((s - ex).abs());
    }
    let ok = worst_anchor <= 1e-12 && worst_pair <= 1e-6;
    check(
        3,
        "characteristic identities: unit anchor sensitivity and exponential formula",
        ok,
        format!("anchor dev = {worst_anchor:.3e}, route mismatch = {worst_pair:.3e}"),
    );
}

#[test]
fn criterion_04_truncation_lemma() {
    let cases = ["1", "cos(2*pi*x)", "sin(2*pi*y)", "cos(2*pi*x)*sin(2*pi*y)"];
    let mut worst_rec = 0.0f64;
    let mut worst_disk = 0.0f64;
    for text in cases {
        let f = parse_expression(text).unwrap().with_unit_periodicity(true);
        let tr = periodic_truncate(&f, 8).unwrap();
        // reconstruction on [0, 1]^2 with every contributing translate
        for i in 0..33 {
            for j in 0..33 {
                let x = i as f64 / 32.0;
                let y = j as f64 / 32.0;
                worst_rec = worst_rec.max((tr.truncated(6, x, y) - f.eval(x, y)).abs());
            }
        }
        for &r in &[0.5f64, 1.0, 2.0] {
            let n = smallest_n_for_disk(r);
            worst_disk = worst_disk.max(verify_truncation_on_disk(&tr, &f, n, r, 41));
        }
    }
    // partition of unity of the window translates is what makes this exact
    let mut pou = 0.0f64;
    for k in 0..40 {
        let x = -1.5 + 3.0 * k as f64 / 39.0;
        let s: f64 = (-4..=4).map(|p| Mollifier::window1(x + p as f64)).sum();
        pou = pou.max((s - 1.0).abs());
    }
    let ok = worst_rec <= 1e-8 && worst_disk <= 1e-10 && pou <= 1e-14;
    check(
        4,
        "truncation lemma: reconstruction and disk-level identities",
        ok,
        format!("reconstruction = {worst_rec:.3e}, disk = {worst_disk:.3e}, partition = {pou:.3e}"),
    );
}

#[test]
fn criterion_05_wave_solver() {
    let _g = GATE.lock().unwrap();
    // zero forcing
    let sys = sweep_system(0.0, &SweepConfig::default());
    let sol = solve_wave(&sys);
    let zero_ok = sol.w.iter().all(|&v| v == 0.0);

    // linear case against the Duhamel quadrature oracle
    let bump = |s: f64| {
        if s.abs() >= 1.0 {
            0.0
        } else {
            (1.0 - s * s).powi(5)
        }
    };
    let h_fn = move |t: f64, z: f64| bump(t) * bump(z);
    let duhamel = |t: f64, z: f64| {
        0.5 * quad::integrate(
            |s| quad::integrate(|zz| h_fn(s, zz), z - (t - s), z + (t - s), 16, 4),
            0.0,
            t,
            16,
            4,
        )
    };
    let probes = [(1.0f64, 0.0f64), (1.5, 0.5), (0.8, -0.7)];
    let dzs = [1.0f64 / 32.0, 1.0 / 64.0, 1.0 / 128.0];
    let mut errs = Vec::new();
    for &dz in &dzs {
        let cfg = SweepConfig {
            b0: 0.0,
            t_max: 2.0,
            z_max: 5.0,
            dz,
        };
        let sol = solve_wave(&sweep_system(1.0, &cfg));
        let mut worst = 0.0f64;
        for &(t, z) in &probes {
            worst = worst.max((sol.interp(t, z) - duhamel(t, z)).abs());
        }
        errs.push(worst);
    }
    let order = fd::fitted_order(&dzs, &errs);

    // blow-up threshold: finite, interior, reproducible
    let cfg = SweepConfig::default();
    let rows = amplitude_sweep(0.05, 8.0, 9, &cfg);
    let rows2 = amplitude_sweep(0.05, 8.0, 9, &cfg);
    let threshold = rows.iter().find(|r| r.blowup).map(|r| r.amplitude);
    let interior = !rows[0].blowup && rows.last().unwrap().blowup;
    let reproducible = rows
        .iter()
        .zip(&rows2)
        .all(|(a, b)| a.blowup == b.blowup && a.lifespan == b.lifespan);

    let ok = zero_ok && (1.8..=2.2).contains(&order) && threshold.is_some() && interior && reproducible;
    check(
        5,
        "wave solver: exact zero data, Duhamel order 2, finite reproducible threshold",
        ok,
        format!(
            "duhamel order = {order:.3} (errs {errs:?}), threshold = {threshold:?}, \
             interior = {interior}, reproducible = {reproducible}"
        ),
    );
}

#[test]
fn criterion_06_global_pipeline() {
    let _g = GATE.lock().unwrap();
    // affine field: mu = 1 with residual at rounding level
    let m = Matrix2::new(0.0, 1.0, 1.0, 0.0);
    let u_affine = strainreal_core::wave::affine_stream(&m);
    let cfg = GlobalConfig {
        radius: 1.0,
        dz: 1.0 / 32.0,
        cutoff: 8,
        ..Default::default()
    };
    let affine_ok = match realize_global(&u_affine, m, &cfg).unwrap() {
        GlobalOutcome::Realized(real) => {
            real.mu.values.iter().all(|v| (v - 1.0).abs() < 1e-12)
                && real.report.max_residual <= 1e-10
        }
        _ => false,
    };

    // periodic perturbation: residual of order ~2 under refinement
    let u = parse_expression("-x*y + (0.01/(2*pi^2))*sin(2*pi*y)").unwrap();
    let mp = Matrix2::new(1.0, 0.0, 0.0, -1.0);
    let dzs = [1.0f64 / 32.0, 1.0 / 64.0];
    let mut errs = Vec::new();
    let mut first_mu: Option<strainreal_core::ScalarGrid> = None;
    for &dz in &dzs {
        let cfg = GlobalConfig {
            radius: 1.0,
            dz,
            cutoff: 16,
            ..Default::default()
        };
        match realize_global(&u, mp, &cfg).unwrap() {
            GlobalOutcome::Realized(real) => {
                errs.push(real.report.max_residual);
                if dz == dzs[0] {
                    first_mu = Some(real.mu.clone());
                }
            }
            GlobalOutcome::BlowUp { reason, .. } => panic!("unexpected blow-up: {reason}"),
        }
    }
    let order = fd::fitted_order(&dzs, &errs);

    // nesting: R = 2 restricted to D(0,1) agrees with the R = 1 run
    let cfg2 = GlobalConfig {
        radius: 2.0,
        dz: dzs[0],
        cutoff: 16,
        ..Default::default()
    };
    let mu2 = match realize_global(&u, mp, &cfg2).unwrap() {
        GlobalOutcome::Realized(real) => real.mu.clone(),
        _ => panic!("unexpected blow-up at R = 2"),
    };
    let mu1 = first_mu.unwrap();
    let mut nest = 0.0f64;
    for j in 0..mu1.grid.ny {
        for i in 0..mu1.grid.nx {
            let (x, y) = (mu1.grid.x(i), mu1.grid.y(j));
            if x * x + y * y > 1.0 {
                continue;
            }
            let i2 = ((x - mu2.grid.x0) / mu2.grid.hx()).round() as usize;
            let j2 = ((y - mu2.grid.y0) / mu2.grid.hy()).round() as usize;
            nest = nest.max((mu1.get(i, j) - mu2.get(i2, j2)).abs());
        }
    }

    let ok = affine_ok && (1.5..=2.6).contains(&order) && nest <= 1e-8;
    check(
        6,
        "global pipeline: affine exact, perturbation at order 2, nesting",
        ok,
        format!(
            "affine = {affine_ok}, order = {order:.3} (errs {errs:?}), nesting = {nest:.3e}"
        ),
    );
}

#[test]
fn criterion_07_laminate_equivalence() {
    let t0 = Instant::now();
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
    let mut agree = true;
    for k in 0..1000 {
        let th: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
        let xi = (th.cos(), th.sin());
        let lambda: f64 = if k % 50 == 0 {
            0.0
        } else {
            rng.gen_range(-3.0..3.0)
        };
        let a: f64 = rng.gen_range(-2.0..2.0);
        let b: f64 = rng.gen_range(-2.0..2.0);
        let e2 = Matrix2::new(a, b, b, -a);
        let basis = laminate::xi_odot_rperp_xi(xi);
        let e1 = Matrix2::new(
            e2.m11 + lambda * basis.m11,
            e2.m12 + lambda * basis.m12,
            e2.m21 + lambda * basis.m21,
            e2.m22 + lambda * basis.m22,
        );
        let closed = laminate::is_realizable(&e1, &e2);
        let equal_phases = e1.sub(&e2).frob_norm() == 0.0;
        let sign = equal_phases
            || laminate::e_rperp_xi_dot_xi(&e1, xi) * laminate::e_rperp_xi_dot_xi(&e2, xi) > 0.0;
        let brute = laminate::brute_force_realizable(&e1, &e2, xi, 241);
        if closed != sign || closed != brute {
            agree = false;
            println!("disagreement at sample {k}: closed={closed} sign={sign} brute={brute}");
        }
        // symmetry and joint scaling of the closed form
        if laminate::is_realizable(&e2, &e1) != closed {
            agree = false;
        }
        if laminate::is_realizable(&e1.scale(2.5), &e2.scale(2.5)) != closed {
            agree = false;
        }
    }
    // hand examples
    let e1 = Matrix2::new(0.0, 1.0, 1.0, 0.0);
    let e2 = Matrix2::new(0.0, 2.0, 2.0, 0.0);
    let hand = laminate::is_realizable(&e1, &e2)
        && !laminate::is_realizable(&e1, &Matrix2::new(0.0, -1.0, -1.0, 0.0));
    let elapsed = t0.elapsed();
    let ok = agree && hand && elapsed.as_secs_f64() < 5.0;
    check(
        7,
        "laminate equivalence: 1000 seeded pairs, three routes agree, hand examples",
        ok,
        format!("agree = {agree}, hand = {hand}, runtime = {elapsed:?}"),
    );
}

#[test]
fn criterion_08_counterexample_certificate() {
    // closed-form obstruction
    let one = parse_expression("1").unwrap();
    let v = casebook::torus_obstruction(&one, 0.1, 0.25).unwrap();
    let obstruction_ok = (v - 0.2).abs() <= 1e-12;

    // printed equation solved by u = 2 pi x for several epsilon
    let u = ScalarFieldExpr::pi().scale(2.0).mul(&ScalarFieldExpr::x());
    let mut printed_dev = 0.0f64;
    for &eps in &[0.01, 0.1, 0.5] {
        let resid = casebook::printed_equation_residual(&u, eps);
        for k in 0..50 {
            let x = -1.0 + 2.0 * k as f64 / 49.0;
            let y = -0.5 + k as f64 / 49.0;
            printed_dev = printed_dev.max(resid.eval(x, y).abs());
        }
    }

    // audit internal consistency: the two pipelines it declares equivalent
    // agree at second order
    let mut agreements = Vec::new();
    let hs = [1.0f64 / 32.0, 1.0 / 64.0];
    for &h in &hs {
        let n = (1.0 / h).round() as usize + 1;
        let grid = strainreal_core::Grid2D::square(0.5, n).unwrap();
        let audit = casebook::sign_convention_audit(0.1, &grid).unwrap();
        assert_eq!(audit.equivalent_pipelines[0], "general_wave_form");
        agreements.push(audit.agreement_sup);
    }
    let order = fd::fitted_order(&hs, &agreements);
    let audit_ok = order >= 1.5; // O(h^2) or better

    let ok = obstruction_ok && printed_dev <= 1e-12 && audit_ok;
    check(
        8,
        "counterexample certificate: obstruction, printed solution, audit consistency",
        ok,
        format!(
            "obstruction = {v:.15}, printed residual = {printed_dev:.3e}, \
             audit agreement order = {order:.3} ({agreements:?})"
        ),
    );
}

#[test]
fn criterion_09_vanishing_family() {
    let p = |s: &str| parse_expression(s).unwrap();
    // realizable case with exact construction
    let v = casebook::vanishing_viscosity(&p("x^2"), &p("x^2")).unwrap();
    let realizable_ok = matches!(v.verdict, casebook::VanishingVerdict::Realizable { .. });
    let grid = strainreal_core::Grid2D::square(1.0, 65).unwrap();
    let mu = v.mu_grid(&grid);
    let e12 = strainreal_core::ScalarGrid::from_fn(grid, |x, y| v.family.strain.e12.eval(x, y));
    let s12 = strainreal_core::ScalarGrid {
        grid,
        values: mu
            .values
            .iter()
            .zip(&e12.values)
            .map(|(m, e)| m * e)
            .collect(),
    };
    let zero = strainreal_core::ScalarGrid::zeros(grid);
    let (d1, d2) = fd::div_symmetric_tracefree(&zero, &s12);
    let mut div_dev = 0.0f64;
    for j in 0..grid.ny {
        for i in 0..grid.nx {
            let (x, y) = (grid.x(i), grid.y(j));
            div_dev = div_dev
                .max((d1.get(i, j) - 2.0 * y).abs())
                .max((d2.get(i, j) - 2.0 * x).abs());
        }
    }

    let v2 = casebook::vanishing_viscosity(&p("x^2"), &p("x^4")).unwrap();
    let v3 = casebook::vanishing_viscosity(&p("2*x^2"), &p("x^2")).unwrap();
    let v4 = casebook::vanishing_viscosity(&p("exp(-(x^-2))"), &p("x^2")).unwrap();
    let not1 = matches!(v2.verdict, casebook::VanishingVerdict::NotRealizable { .. });
    let not2 = matches!(v3.verdict, casebook::VanishingVerdict::NotRealizable { .. });
    let inconclusive = matches!(v4.verdict, casebook::VanishingVerdict::Inconclusive { .. });

    let ok = realizable_ok && div_dev <= 1e-10 && not1 && not2 && inconclusive;
    check(
        9,
        "vanishing family: verdicts and the exact quadratic construction",
        ok,
        format!(
            "div deviation = {div_dev:.3e}, verdicts = [{realizable_ok}, {not1}, {not2}, \
             inconclusive = {inconclusive}]"
        ),
    );
}

#[test]
fn criterion_10_determinism() {
    let _g = GATE.lock().unwrap();
    let dir = tmpdir("c10");
    let run = |dir: &Path| {
        let status = Command::new(bin())
            .args([
                "realize",
                "local",
                "--stream",
                "(x^2-y^2)/2 + 0.05*sin(x)*sin(y)",
                "--nx",
                "33",
                "--seed",
                "42",
                "--out-dir",
            ])
            .arg(dir)
            .status()
            .unwrap();
        assert!(status.success());
        let status = Command::new(bin())
            .args([
                "laminate", "check", "--E1", "0,1,1,0", "--E2", "0,2,2,0", "--xi", "1,0",
                "--seed", "42", "--out-dir",
            ])
            .arg(dir.join("lam").to_str().unwrap())
            .status()
            .unwrap();
        assert!(status.success());
    };
    std::fs::create_dir_all(dir.join("lam")).unwrap();
    run(&dir);
    let artifacts = ["mu.csv", "p.csv", "report.json", "config.echo.json", "lam/report.json"];
    let snapshot: Vec<Vec<u8>> = artifacts
        .iter()
        .map(|a| std::fs::read(dir.join(a)).unwrap())
        .collect();
    run(&dir);
    let mut identical = true;
    for (a, before) in artifacts.iter().zip(&snapshot) {
        let after = std::fs::read(dir.join(a)).unwrap();
        if &after != before {
            identical = false;
            println!("artifact {a} differs between identical runs");
        }
    }
    check(
        10,
        "determinism: identical config and seed give byte-identical artifacts",
        identical,
        format!("{} artifacts compared", artifacts.len()),
    );
}
