use glasscav::analysis::{overlap_distribution, overlap_matrix};
use glasscav::coupling::{assemble_j, j1_fixture, CouplingMatrix, PhysicalParams};
use glasscav::dynamics::{generate_ensemble, DescentOptions, Engine, RampSchedule};
use glasscav::imaging::{fit_spins, synthesize_field, FitOptions, ImagingGrid};
use glasscav::io::{read_coupling, read_ensemble, read_histogram, write_coupling, write_ensemble, write_histogram};
use glasscav::optics::{calibrate_center_waist, CalibrationOptions, CavityGeometry, ComplexFieldImage};
use glasscav::Error;

fn j1() -> CouplingMatrix {
    assemble_j(&j1_fixture(), &CavityGeometry::four_seven(), &Default::default(), true).unwrap()
}

fn descent_replicas(jm: &CouplingMatrix, n: usize) -> glasscav::dynamics::ReplicaEnsemble {
    let engine = Engine::Descent(DescentOptions::default());
    generate_ensemble(jm, &PhysicalParams::default(), &RampSchedule::default(), &engine, n, 0).unwrap()
}

#[test]
fn calibration_recovers_center_and_waist() {
    let geom = CavityGeometry::four_seven();
    let jm = j1();
    let grid = ImagingGrid::balanced(96);
    let s = descent_replicas(&jm, 2).configs[0].s.clone();
    let img = synthesize_field(&s, &jm.sites, &geom, &grid, 1.0, None).unwrap();
    // Same pixels, wrong bookkeeping: calibration must find the truth from the data.
    let mut guess = img.clone();
    guess.center = (img.center.0 + 1.3, img.center.1 - 0.8);
    guess.w0_px = img.w0_px * 1.05;
    let cal = calibrate_center_waist(&guess, &geom, &CalibrationOptions::default()).unwrap();
    assert!((cal.x_c - img.center.0).abs() < 0.05, "{cal:?}");
    assert!((cal.y_c - img.center.1).abs() < 0.05, "{cal:?}");
    assert!((cal.w0_px / img.w0_px - 1.0).abs() < 0.01, "{cal:?}");
}

#[test]
fn descent_replicas_of_the_fixture_survive_an_imaging_round_trip() {
    let geom = CavityGeometry::four_seven();
    let jm = j1();
    let ens = descent_replicas(&jm, 4);
    let opts = FitOptions { amplitude_scale: Some(1.0), ..FitOptions::default() };
    for c in &ens.configs[..2] {
        let img = synthesize_field(&c.s, &jm.sites, &geom, &ImagingGrid::balanced(96), 1.0, None).unwrap();
        let fit = fit_spins(&img, &jm.sites, &geom, &opts).unwrap();
        let err = fit.s.iter().zip(&c.s).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        assert!(err < 1e-3, "{err}");
    }
}

#[test]
fn zero_images_are_degenerate() {
    let img = ComplexFieldImage::centered(32, 34.8, 3.0).unwrap();
    let r = calibrate_center_waist(&img, &CavityGeometry::four_seven(), &CalibrationOptions::default());
    assert!(matches!(r, Err(Error::DegenerateImage(_))));
}

#[test]
fn persisted_artifacts_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let jm = j1();
    let jp = dir.path().join("j.csv");
    write_coupling(&jp, &jm).unwrap();
    let back = read_coupling(&jp).unwrap();
    assert_eq!(back.j, jm.j);
    assert_eq!(back.sites, jm.sites);
    assert_eq!(back.fingerprint(), jm.fingerprint());

    let ens = descent_replicas(&jm, 6);
    let ep = dir.path().join("e.csv");
    write_ensemble(&ep, &ens, serde_json::json!({ "engine": "descent" })).unwrap();
    let e2 = read_ensemble(&ep).unwrap();
    assert!(e2.rows().zip(ens.rows()).all(|(a, b)| a == b));
    assert_eq!(e2.j_ref, jm.fingerprint());

    let h = overlap_distribution(&overlap_matrix(&ens).unwrap(), 50, true).unwrap();
    let hp = dir.path().join("h.csv");
    write_histogram(&hp, &h).unwrap();
    assert_eq!(read_histogram(&hp).unwrap(), h);
}
