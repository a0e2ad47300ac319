//! Acceptance suite: one test per release criterion, each printing a
//! pass line (run with `--nocapture` to see them). Tolerances are pinned
//! in the assertions.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};
use std::time::Instant;

use qsdwalk::model::Ensemble;
use qsdwalk::optics::{
    angles_for_schedule, estimate_figure_of_merit, preparation_angle, simulate_counts, WaveplateId,
};
use qsdwalk::rng::Stream;
use qsdwalk::scan::{equality_locus, GridSpec, OutputFormat, ScanConfig};
use qsdwalk::strategies::{
    bounds_report, brute_force_optimize_med, max_confidence_eigen_oracle,
    mcd_confidence_closed_form, mcd_confidence_noncontextual, mcd_confidence_quantum, mcd_nu,
    mcd_povm, med_mu, med_objective, med_povm, med_success_quantum, med_threshold, mu_value,
    MuConvention, Strategy,
};
use qsdwalk::walk::{schedule_mcd, schedule_med, verify_schedule};

const PI_12: f64 = PI / 12.0;
const PI_3: f64 = PI / 3.0;

#[test]
fn acceptance_1_povm_validity_sweep() {
    let start = Instant::now();
    let mut stream = Stream::new(0xACC1);
    for _ in 0..10_000 {
        let p = stream.next_open(0.0, 0.5);
        let theta = stream.next_open(0.0, FRAC_PI_2);
        for povm in [
            &med_povm(p, theta).unwrap().povm,
            &mcd_povm(p, theta).unwrap().povm,
        ] {
            let d = povm.validate();
            assert!(
                d.completeness_defect <= 1e-12,
                "completeness {:.3e} at ({p}, {theta})",
                d.completeness_defect
            );
            for c in &d.elements {
                assert!(
                    c.min_eigenvalue >= -1e-12,
                    "eigenvalue {:.3e} at ({p}, {theta})",
                    c.min_eigenvalue
                );
            }
        }
    }
    let elapsed = start.elapsed();
    assert!(elapsed.as_secs_f64() < 5.0, "took {elapsed:?}");
    println!("acceptance 1 (POVM validity sweep, 10^4 points, {elapsed:?}): PASS");
}

#[test]
fn acceptance_2_walk_povm_equivalence() {
    let start = Instant::now();
    let mut worst_med: f64 = 0.0;
    let mut worst_mcd: f64 = 0.0;
    let mut mcd_points = 0usize;
    for i in 0..50 {
        let p = 0.5 * (i as f64 + 1.0) / 50.0;
        for j in 0..50 {
            let theta = FRAC_PI_2 * (j as f64 + 1.0) / 51.0;
            let med = med_povm(p, theta).unwrap();
            let schedule = schedule_med(p, theta, MuConvention::Derived).unwrap();
            worst_med = worst_med.max(verify_schedule(&schedule, &med.povm, 100).unwrap());
            if mcd_nu(p, theta).unwrap() <= 1.0 {
                let mcd = mcd_povm(p, theta).unwrap();
                let schedule = schedule_mcd(p, theta).unwrap();
                worst_mcd = worst_mcd.max(verify_schedule(&schedule, &mcd.povm, 100).unwrap());
                mcd_points += 1;
            }
        }
    }
    assert!(worst_med <= 1e-10, "MED deviation {worst_med:.3e}");
    assert!(worst_mcd <= 1e-10, "MCD deviation {worst_mcd:.3e}");
    assert!(mcd_points > 1000, "nu <= 1 region unexpectedly small");
    let elapsed = start.elapsed();
    assert!(elapsed.as_secs_f64() < 30.0, "took {elapsed:?}");
    println!(
        "acceptance 2 (walk-POVM equivalence, 50x50 grid x100 probes, \
         MED {worst_med:.2e} / MCD {worst_mcd:.2e}, {elapsed:?}): PASS"
    );
}

#[test]
fn acceptance_3_optimality_oracle() {
    let start = Instant::now();
    let mut stream = Stream::new(0xACC3);
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let theta = stream.next_open(0.0, FRAC_PI_2);
        let pstar = med_threshold(theta).unwrap();
        let p = stream.next_open(0.0, pstar * 0.999);
        let (mu_star, _) = brute_force_optimize_med(p, theta, 1_000_000).unwrap();
        let closed = med_mu(p, theta).unwrap();
        worst = worst.max((mu_star - closed).abs());
        assert!(
            (mu_star - closed).abs() <= 1e-5,
            "brute force {mu_star} vs closed {closed} at ({p}, {theta})"
        );
    }
    // The closed form strictly beats the printed-variant coin parameter.
    let s_closed = med_objective(0.3, PI_12, med_mu(0.3, PI_12).unwrap());
    let s_printed = med_objective(0.3, PI_12, mu_value(0.3, PI_12, MuConvention::Printed));
    assert!(s_closed > s_printed + 1e-6, "{s_closed} vs {s_printed}");
    let elapsed = start.elapsed();
    println!(
        "acceptance 3 (optimality oracle, worst |mu - mu*| = {worst:.2e}, \
         margin over variant {:.3e}, {elapsed:?}): PASS",
        s_closed - s_printed
    );
}

#[test]
fn acceptance_4_confidence_triple_agreement() {
    let ratio = mcd_confidence_quantum(0.1, PI_3).unwrap();
    let closed = mcd_confidence_closed_form(0.1, PI_3).unwrap();
    let eigen = max_confidence_eigen_oracle(&Ensemble::mirror(0.1, PI_3).unwrap(), 0).unwrap();
    for (name, value) in [("ratio", ratio), ("eigen", eigen), ("closed", closed)] {
        assert!(
            (value - 0.5294118).abs() <= 1e-7 && (value - 9.0 / 17.0).abs() <= 1e-10,
            "{name} = {value}"
        );
    }
    assert!((ratio - eigen).abs() <= 1e-10 && (ratio - closed).abs() <= 1e-10);
    let bound = mcd_confidence_noncontextual(0.1, PI_3).unwrap();
    assert!((bound - 0.3076923).abs() <= 1e-7 && (bound - 4.0 / 13.0).abs() <= 1e-12);
    let gap = bounds_report(0.1, PI_3, Strategy::Mcd).unwrap().gap;
    assert!((gap - 0.2217195).abs() <= 1e-7, "gap = {gap}");
    println!(
        "acceptance 4 (confidence triple at (0.1, pi/3): {ratio:.7} vs bound {bound:.7}, \
         gap {gap:.7}): PASS"
    );
}

#[test]
fn acceptance_5_region_structure() {
    // Exceptional slice: no advantage anywhere at theta = pi/4.
    for i in 0..1000 {
        let p = 0.5 * (i as f64 + 1.0) / 1000.0;
        let gap = bounds_report(p, FRAC_PI_4, Strategy::Med).unwrap().gap;
        assert!(gap <= 1e-9, "gap {gap} at p = {p}");
    }
    let r1 = bounds_report(0.4, PI_12, Strategy::Med).unwrap();
    assert!(
        r1.advantage && (r1.gap - 0.0866).abs() <= 1e-4,
        "gap {}",
        r1.gap
    );
    let r2 = bounds_report(0.45, 5.0 * PI_12, Strategy::Med).unwrap();
    assert!(
        r2.advantage && (r2.gap - 0.0192).abs() <= 1e-3,
        "gap {}",
        r2.gap
    );
    let root = equality_locus(Strategy::Med, PI_12, (0.05, 0.5))
        .unwrap()
        .expect("sign change");
    assert!(root > 0.30 && root < 0.35, "locus at {root}");
    println!(
        "acceptance 5 (region structure: exceptional slice, gaps {:.4}/{:.4}, \
         locus {root:.4}): PASS",
        r1.gap, r2.gap
    );
}

#[test]
fn acceptance_6_waveplate_reproduction() {
    // Preparation angles, exactly.
    let theta_small = PI / 12.0;
    assert_eq!(preparation_angle(theta_small).unwrap().angle, PI / 24.0);
    assert_eq!(preparation_angle(-theta_small).unwrap().angle, -PI / 24.0);
    assert_eq!(preparation_angle(0.0).unwrap().angle, 0.0);
    let theta_large = PI / 3.0;
    assert_eq!(preparation_angle(theta_large).unwrap().angle, PI / 6.0);
    assert_eq!(preparation_angle(-theta_large).unwrap().angle, -PI / 6.0);

    let h3_of = |settings: &[qsdwalk::optics::WaveplateSetting]| {
        settings
            .iter()
            .find(|s| s.element == WaveplateId::H3)
            .unwrap()
            .angle
    };
    // MCD splitting plate: 0.0162 pi within 0.0005 pi.
    let mcd = angles_for_schedule(&schedule_mcd(0.1, PI_3).unwrap()).unwrap();
    let h3 = h3_of(&mcd);
    assert!((h3 / PI - 0.0162).abs() <= 0.0005, "H3/pi = {}", h3 / PI);
    // MED splitting plate under the printed convention: 0.0381 pi.
    let med =
        angles_for_schedule(&schedule_med(0.3, PI_12, MuConvention::Printed).unwrap()).unwrap();
    let h3p = h3_of(&med);
    assert!((h3p / PI - 0.0381).abs() <= 0.0005, "H3/pi = {}", h3p / PI);
    // Fixed plates, exactly.
    for s in mcd.iter().chain(med.iter()) {
        match s.element {
            WaveplateId::H2 | WaveplateId::H5 => assert_eq!(s.angle, FRAC_PI_4),
            WaveplateId::H4 => assert_eq!(s.angle, PI / 8.0),
            _ => {}
        }
    }
    println!(
        "acceptance 6 (waveplates: H1 halves exact, H3 {:.4}pi / {:.4}pi, \
         H2/H5 = pi/4, H4 = pi/8): PASS",
        h3 / PI,
        h3p / PI
    );
}

#[test]
fn acceptance_7_monte_carlo_convergence() {
    let start = Instant::now();
    let seed = 7;

    // MED at (0.4, pi/12): mean within 5 sample sigma of 0.6.
    let ensemble = Ensemble::mirror(0.4, PI_12).unwrap();
    let povm = med_povm(0.4, PI_12).unwrap().povm;
    let records = simulate_counts(&ensemble, &povm, None, 100_000, 30, seed).unwrap();
    let med_estimate = estimate_figure_of_merit(&records, Strategy::Med, &povm.labels).unwrap();
    let analytic = med_success_quantum(0.4, PI_12).unwrap();
    assert!((analytic - 0.6).abs() < 1e-12);
    assert!(
        (med_estimate.mean - analytic).abs() <= 5.0 * med_estimate.std,
        "mean {} vs {analytic} (std {})",
        med_estimate.mean,
        med_estimate.std
    );

    // MCD at (0.1, pi/3): mean within 5 sample sigma of 9/17.
    let ensemble = Ensemble::mirror(0.1, PI_3).unwrap();
    let povm = mcd_povm(0.1, PI_3).unwrap().povm;
    let records = simulate_counts(&ensemble, &povm, None, 100_000, 30, seed).unwrap();
    let mcd_estimate = estimate_figure_of_merit(&records, Strategy::Mcd, &povm.labels).unwrap();
    let analytic = mcd_confidence_quantum(0.1, PI_3).unwrap();
    assert!(
        (mcd_estimate.mean - analytic).abs() <= 5.0 * mcd_estimate.std,
        "mean {} vs {analytic} (std {})",
        mcd_estimate.mean,
        mcd_estimate.std
    );
    assert_eq!(mcd_estimate.excluded_runs, 0);

    // Shot-noise scaling: sample sigma grows by 10 +- 20% when the photon
    // count drops from 10^5 to 10^3.
    let ensemble = Ensemble::mirror(0.4, PI_12).unwrap();
    let povm = med_povm(0.4, PI_12).unwrap().povm;
    let coarse = simulate_counts(&ensemble, &povm, None, 1_000, 30, seed).unwrap();
    let coarse_estimate = estimate_figure_of_merit(&coarse, Strategy::Med, &povm.labels).unwrap();
    let ratio = coarse_estimate.std / med_estimate.std;
    assert!(
        (8.0..=12.0).contains(&ratio),
        "sigma ratio {ratio} (coarse {} vs fine {})",
        coarse_estimate.std,
        med_estimate.std
    );
    let elapsed = start.elapsed();
    assert!(elapsed.as_secs_f64() < 60.0, "took {elapsed:?}");
    println!(
        "acceptance 7 (Monte Carlo: MED {:.5}, MCD {:.5}, sigma ratio {ratio:.2}, \
         {elapsed:?}): PASS",
        med_estimate.mean, mcd_estimate.mean
    );
}

#[test]
fn acceptance_8_branch_continuity() {
    let mut stream = Stream::new(0xACC8);
    for _ in 0..20 {
        let theta = stream.next_open(0.05, FRAC_PI_2 - 0.05);
        let pstar = med_threshold(theta).unwrap();
        let below = med_success_quantum(pstar - 1e-6, theta).unwrap();
        let above = med_success_quantum(pstar + 1e-6, theta).unwrap();
        assert!(
            (below - above).abs() <= 1e-4,
            "jump {:.3e} at theta = {theta}",
            (below - above).abs()
        );
        let mu = med_mu(pstar, theta).unwrap();
        assert!((mu - 1.0).abs() <= 1e-6, "mu(p*) = {mu} at theta = {theta}");
    }
    println!("acceptance 8 (branch continuity at 20 random thetas): PASS");
}

#[test]
fn acceptance_9_scan_determinism() {
    let dir = tempfile::tempdir().unwrap();
    let out_a = dir.path().join("a.csv");
    let out_b = dir.path().join("b.csv");
    let args = |out: &std::path::Path| {
        vec![
            "qsdwalk".to_string(),
            "scan".into(),
            "--strategy".into(),
            "mcd".into(),
            "--p".into(),
            "0.1".into(),
            "--p".into(),
            "0.5".into(),
            "--p-count".into(),
            "7".into(),
            "--theta".into(),
            "pi/6".into(),
            "--theta".into(),
            "pi/3".into(),
            "--theta-count".into(),
            "5".into(),
            "--photons".into(),
            "5000".into(),
            "--runs".into(),
            "8".into(),
            "--seed".into(),
            "31".into(),
            "--out".into(),
            out.display().to_string(),
        ]
    };
    assert_eq!(qsdwalk::cli::cli_main(args(&out_a)), 0);
    assert_eq!(qsdwalk::cli::cli_main(args(&out_b)), 0);
    let a = std::fs::read(&out_a).unwrap();
    let b = std::fs::read(&out_b).unwrap();
    assert!(!a.is_empty());
    assert_eq!(a, b, "scan output is not byte-identical");

    // Direct library path agrees too.
    let config = ScanConfig {
        strategy: Strategy::Mcd,
        p_grid: GridSpec::new(0.1, 0.5, 7),
        theta_grid: GridSpec::new(PI / 6.0, PI_3, 5),
        mu_convention: MuConvention::Derived,
        photons: 5000,
        runs: 8,
        seed: 31,
        output_path: None,
        format: OutputFormat::Csv,
    };
    let rows = qsdwalk::scan::scan(&config).unwrap();
    let mut buf = Vec::new();
    qsdwalk::scan::write_rows_csv(&rows, &config, &mut buf).unwrap();
    assert_eq!(a, buf);
    println!(
        "acceptance 9 (byte-identical scan output, {} bytes): PASS",
        a.len()
    );
}
