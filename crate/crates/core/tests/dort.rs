//! Time-reversal operator of the three-obstacle mirror experiment: spectrum
//! against an independent SVD of the far-field matrix, and selective
//! focusing of the eigenvectors.

use multidisk::basis::{make_layout, Truncation, DEFAULT_EPS};
use multidisk::dort::{far_field_matrix, herglotz_focus_map, time_reversal_operator, DEFAULT_SIGNIFICANCE};
use multidisk::formulations::{Formulation, Method, Storage};
use multidisk::geometry::{Disk, DiskConfig};
use multidisk::postproc::GridSpec;
use multidisk::solver::GmresOptions;
use nalgebra::DMatrix;
use std::f64::consts::TAU;

const N_ALPHA: usize = 64;

fn obstacles() -> DiskConfig<f64> {
    DiskConfig::new(vec![
        Disk::new(0.0, 20.0, 0.02),
        Disk::new(10.0, -10.0, 0.01),
        Disk::new(-10.0, -20.0, 0.005),
    ])
    .unwrap()
}

#[test]
fn spectrum_matches_singular_values_and_focuses() {
    let config = obstacles();
    let k = TAU;
    let layout = make_layout(&config, k, &Truncation::Tolerance(DEFAULT_EPS)).unwrap();
    let f = far_field_matrix(&config, &layout, k, N_ALPHA, &Formulation::Efie, Storage::Dense, &Method::Direct).unwrap();
    let t = time_reversal_operator(&f).unwrap();

    let n = N_ALPHA;
    for i in 0..n {
        for j in 0..n {
            assert!((t.matrix.get(i, j) - t.matrix.get(j, i).conj()).norm() <= 1e-10 * t.eigenvalues[0]);
        }
    }
    assert!(t.eigenvalues.iter().all(|&l| l >= -1e-10 * t.eigenvalues[0]));

    let svd = DMatrix::from_fn(n, n, |i, j| f.matrix.get(i, j)).svd(false, false);
    let mut s2: Vec<f64> = svd.singular_values.iter().map(|s| s * s).collect();
    s2.sort_by(|a, b| b.partial_cmp(a).unwrap());
    for (l, s) in t.eigenvalues.iter().zip(&s2) {
        assert!((l - s).abs() <= 1e-10 * s2[0], "{l:e} vs {s:e}");
    }
    eprintln!("leading eigenvalues {:?}", &t.eigenvalues[..4]);
    assert_eq!(t.significant(DEFAULT_SIGNIFICANCE), 3);

    let grid = GridSpec::new((-15.0, 15.0), (-25.0, 25.0), 151, 251).unwrap();
    for (i, d) in config.disks().iter().enumerate() {
        let map = herglotz_focus_map(&grid, k, &t.eigenvectors[i], &f.angles, f.step(), &config).unwrap();
        let peak = map
            .values
            .iter()
            .zip(&map.nodes)
            .max_by(|a, b| a.0.norm().partial_cmp(&b.0.norm()).unwrap())
            .unwrap()
            .1;
        let dist = (peak[0] - d.x1).hypot(peak[1] - d.x2);
        eprintln!("eigenvector {i} peaks at {peak:?}, {dist:.3} from disk {i}");
        assert!(dist <= TAU / k);
    }
}

#[test]
fn dense_and_iterative_paths_agree() {
    let config = obstacles();
    let k = TAU;
    let layout = make_layout(&config, k, &Truncation::Tolerance(DEFAULT_EPS)).unwrap();
    let n = 16;
    let direct = far_field_matrix(&config, &layout, k, n, &Formulation::Efie, Storage::Dense, &Method::Direct).unwrap();
    let gmres = Method::Gmres { options: GmresOptions { tol: 1e-12, ..GmresOptions::default() }, precondition: true };
    let toeplitz = far_field_matrix(&config, &layout, k, n, &Formulation::Efie, Storage::Toeplitz, &gmres).unwrap();
    let scale = direct.matrix.data().iter().map(|z| z.norm()).fold(0.0, f64::max);
    for (a, b) in direct.matrix.data().iter().zip(toeplitz.matrix.data()) {
        assert!((a - b).norm() <= 1e-8 * scale);
    }
}
