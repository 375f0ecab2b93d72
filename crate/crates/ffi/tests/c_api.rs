use std::ffi::{c_char, CString};
use std::ptr;

use sns_ffi::*;

fn last_error() -> String {
    let mut buf = vec![0 as c_char; 512];
    let n = unsafe { sns_last_error_message(buf.as_mut_ptr(), buf.len()) };
    let bytes: Vec<u8> = buf[..n.min(511)].iter().map(|&c| c as u8).collect();
    String::from_utf8(bytes).unwrap()
}

fn grid(n: usize) -> *mut SnsGrid {
    let mut g = ptr::null_mut();
    assert_eq!(unsafe { sns_grid_new(n, 1, &mut g) }, SnsStatus::Ok);
    g
}

fn shear_samples(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut u1 = vec![0.0; n * n];
    let u2 = vec![0.0; n * n];
    for i1 in 0..n {
        for i2 in 0..n {
            let y = i2 as f64 / n as f64;
            u1[i1 * n + i2] = (2.0 * std::f64::consts::PI * y).sin();
        }
    }
    (u1, u2)
}

#[test]
fn grid_lifecycle_and_queries() {
    let g = grid(32);
    unsafe {
        assert_eq!(sns_grid_n(g), 32);
        assert_eq!(sns_grid_kmax(g), 10);
        sns_grid_free(g);
        assert_eq!(sns_grid_n(ptr::null()), 0);
        assert_eq!(sns_grid_kmax(ptr::null()), -1);
        sns_grid_free(ptr::null_mut());
    }
}

#[test]
fn null_pointers_are_reported() {
    unsafe {
        assert_eq!(sns_grid_new(16, 1, ptr::null_mut()), SnsStatus::NullPointer);
        let mut f = ptr::null_mut();
        let v = [0.0; 4];
        let s = sns_field_from_physical(ptr::null(), v.as_ptr(), v.as_ptr(), 4, &mut f);
        assert_eq!(s, SnsStatus::NullPointer);
        assert!(f.is_null());
        assert!(last_error().contains("grid"));
        assert_eq!(sns_simulation_step(ptr::null_mut(), 1), SnsStatus::NullPointer);
        assert!(sns_simulation_time(ptr::null()).is_nan());
    }
}

#[test]
fn invalid_grid_size_sets_message() {
    let mut g = ptr::null_mut();
    let s = unsafe { sns_grid_new(0, 1, &mut g) };
    assert_eq!(s, SnsStatus::InvalidArgument);
    assert!(g.is_null());
    assert!(!last_error().is_empty());
    let need = unsafe { sns_last_error_message(ptr::null_mut(), 0) };
    assert_eq!(need, last_error().len());
}

#[test]
fn field_roundtrips_through_physical_samples() {
    let n = 16;
    let g = grid(n);
    let (u1, u2) = shear_samples(n);
    unsafe {
        let mut f = ptr::null_mut();
        assert_eq!(sns_field_from_physical(g, u1.as_ptr(), u2.as_ptr(), n * n, &mut f), SnsStatus::Ok);
        let mut norm = 0.0;
        assert_eq!(sns_field_l2_norm(f, &mut norm), SnsStatus::Ok);
        assert!((norm - 0.5f64.sqrt()).abs() < 1e-12);
        let (mut a, mut b) = (vec![0.0; n * n], vec![0.0; n * n]);
        assert_eq!(sns_field_to_physical(f, a.as_mut_ptr(), b.as_mut_ptr(), n * n), SnsStatus::Ok);
        assert!(a.iter().zip(&u1).all(|(x, y)| (x - y).abs() < 1e-12));
        assert!(b.iter().all(|x| x.abs() < 1e-12));
        let mut small = vec![0.0; 3];
        assert_eq!(
            sns_field_to_physical(f, small.as_mut_ptr(), small.as_mut_ptr(), 3),
            SnsStatus::BufferTooSmall
        );
        sns_field_free(f);
        sns_grid_free(g);
    }
}

#[test]
fn wrong_sample_count_is_rejected() {
    let g = grid(8);
    let v = vec![0.0; 10];
    let mut f = ptr::null_mut();
    let s = unsafe { sns_field_from_physical(g, v.as_ptr(), v.as_ptr(), 10, &mut f) };
    assert_eq!(s, SnsStatus::InvalidArgument);
    unsafe { sns_grid_free(g) };
}

#[test]
fn snapshot_save_and_load() {
    let dir = tempfile::tempdir().unwrap();
    let path = CString::new(dir.path().join("w.snsf").to_str().unwrap()).unwrap();
    let n = 12;
    let g = grid(n);
    let (u1, u2) = shear_samples(n);
    unsafe {
        let mut f = ptr::null_mut();
        assert_eq!(sns_field_from_physical(g, u1.as_ptr(), u2.as_ptr(), n * n, &mut f), SnsStatus::Ok);
        assert_eq!(sns_field_save(f, path.as_ptr()), SnsStatus::Ok);
        let mut h = ptr::null_mut();
        assert_eq!(sns_field_load(path.as_ptr(), &mut h), SnsStatus::Ok);
        assert_eq!(sns_field_n(h), n);
        let (mut a, mut b) = (0.0, 0.0);
        sns_field_l2_norm(f, &mut a);
        sns_field_l2_norm(h, &mut b);
        assert_eq!(a.to_bits(), b.to_bits());
        sns_field_free(f);
        sns_field_free(h);
        let missing = CString::new(dir.path().join("none.snsf").to_str().unwrap()).unwrap();
        let mut m = ptr::null_mut();
        assert_eq!(sns_field_load(missing.as_ptr(), &mut m), SnsStatus::Io);
        sns_grid_free(g);
    }
}

#[test]
fn simulation_steps_and_matches_shear_decay() {
    let cfg = CString::new("n = 16\nseed = 1\ndt = 0.001\nnoise = off\nu0.mode = shear\nu0.amplitude = 1\n").unwrap();
    let base = CString::new(".").unwrap();
    unsafe {
        let mut s = ptr::null_mut();
        assert_eq!(sns_simulation_new(cfg.as_ptr(), base.as_ptr(), &mut s), SnsStatus::Ok);
        assert_eq!(sns_simulation_step(s, 1000), SnsStatus::Ok);
        assert!((sns_simulation_time(s) - 1.0).abs() < 1e-12);
        assert!(sns_simulation_lambda(s) >= 1.0);
        let mut w = ptr::null_mut();
        assert_eq!(sns_simulation_velocity(s, &mut w), SnsStatus::Ok);
        let mut norm = 0.0;
        sns_field_l2_norm(w, &mut norm);
        assert!((norm - 0.5f64.sqrt() * (-1.0f64).exp()).abs() < 1e-12);
        sns_field_free(w);
        sns_simulation_free(s);
    }
}

#[test]
fn config_errors_carry_line_numbers() {
    let cfg = CString::new("n = 16\nseed = 1\nbogus = 3\n").unwrap();
    let base = CString::new(".").unwrap();
    let mut s = ptr::null_mut();
    let st = unsafe { sns_simulation_new(cfg.as_ptr(), base.as_ptr(), &mut s) };
    assert_eq!(st, SnsStatus::Config);
    assert!(s.is_null());
    assert!(last_error().contains("line 3"), "{}", last_error());
}

#[test]
fn run_config_writes_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let cfg_path = dir.path().join("run.cfg");
    std::fs::write(&cfg_path, "n = 16\nseed = 3\ndt = 0.001\nt_end = 0.02\nout_dir = out\n").unwrap();
    let p = CString::new(cfg_path.to_str().unwrap()).unwrap();
    assert_eq!(unsafe { sns_run_config(p.as_ptr()) }, SnsStatus::Ok);
    assert!(dir.path().join("out/manifest.json").exists());
    assert!(dir.path().join("out/trajectory.csv").exists());
}

#[test]
fn explosion_is_reported() {
    let dir = tempfile::tempdir().unwrap();
    let cfg_path = dir.path().join("run.cfg");
    std::fs::write(&cfg_path, "n = 16\nseed = 3\ndt = 0.001\nt_end = 0.02\nceiling = 1e-6\nout_dir = out\n").unwrap();
    let p = CString::new(cfg_path.to_str().unwrap()).unwrap();
    assert_eq!(unsafe { sns_run_config(p.as_ptr()) }, SnsStatus::Explosion);
    assert!(last_error().contains("EXPLOSION_SUSPECTED"));
}

#[test]
fn header_is_valid_c() {
    let header = concat!(env!("CARGO_MANIFEST_DIR"), "/include/sns_ffi.h");
    let src = std::env::temp_dir().join(format!("sns_ffi_check_{}.c", std::process::id()));
    std::fs::write(&src, format!("#include \"{header}\"\nint main(void) {{ return SNS_STATUS_OK; }}\n")).unwrap();
    let status = std::process::Command::new("cc")
        .args(["-std=c99", "-Wall", "-Werror", "-fsyntax-only"])
        .arg(&src)
        .status();
    let _ = std::fs::remove_file(&src);
    match status {
        Ok(s) => assert!(s.success(), "header failed to compile"),
        Err(_) => eprintln!("cc not found; header syntax not checked"),
    }
}
