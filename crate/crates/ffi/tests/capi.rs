use std::ffi::CStr;
use std::f64::consts::PI;
use std::path::{Path, PathBuf};
use std::process::Command;
use std::ptr;

use emdkit_ffi::*;

fn tones(n: usize, fs: f64) -> Vec<f64> {
    (0..n)
        .map(|i| {
            let t = i as f64 / fs;
            (2.0 * PI * 3.0 * t).sin() + 0.5 * (2.0 * PI * 17.0 * t).sin() + 0.2
        })
        .collect()
}

fn last_error() -> String {
    let p = emdkit_last_error();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

#[test]
fn decompose_and_copy_out() {
    let x = tones(600, 100.0);
    let mut h = ptr::null_mut();
    let st = unsafe { emdkit_decompose(x.as_ptr(), x.len(), 100.0, EmdkitVariant::Rouimf, ptr::null(), &mut h) };
    assert_eq!(st, EmdkitStatus::Ok);
    unsafe {
        let n = emdkit_decomposition_imf_count(h);
        let len = emdkit_decomposition_len(h);
        assert!(n >= 1);
        assert_eq!(len, x.len());
        let mut sum = vec![emdkit_decomposition_dc_constant(h); len];
        let mut buf = vec![0.0; len];
        for k in 0..=n {
            assert_eq!(emdkit_decomposition_copy_component(h, k, buf.as_mut_ptr(), len), EmdkitStatus::Ok);
            sum.iter_mut().zip(&buf).for_each(|(s, b)| *s += b);
        }
        for (a, b) in sum.iter().zip(&x) {
            assert!((a - b).abs() < 1e-9);
        }
        assert_eq!(
            emdkit_decomposition_copy_component(h, n + 1, buf.as_mut_ptr(), len),
            EmdkitStatus::OutOfRange
        );
        assert_eq!(
            emdkit_decomposition_copy_component(h, 0, buf.as_mut_ptr(), len - 1),
            EmdkitStatus::OutOfRange
        );
        let mut s = EmdkitOrthoSummary::default();
        assert_eq!(emdkit_decomposition_ortho_summary(h, &mut s), EmdkitStatus::Ok);
        assert!(s.pee.abs() <= 1e-10);
        emdkit_decomposition_free(h);
    }
}

#[test]
fn error_codes_and_messages() {
    let x = [1.0, 2.0];
    let mut h = ptr::null_mut();
    let st = unsafe { emdkit_decompose(x.as_ptr(), 2, 0.0, EmdkitVariant::Emd, ptr::null(), &mut h) };
    assert_eq!(st, EmdkitStatus::InvalidArgument);
    assert!(h.is_null());
    let st = unsafe { emdkit_decompose(ptr::null(), 2, 10.0, EmdkitVariant::Emd, ptr::null(), &mut h) };
    assert_eq!(st, EmdkitStatus::NullPointer);
    assert!(last_error().contains("null"));

    let y = tones(200, 100.0);
    let mut opts = unsafe {
        let mut o = std::mem::zeroed();
        assert_eq!(emdkit_options_default(&mut o), EmdkitStatus::Ok);
        o
    };
    opts.sd_threshold = -1.0;
    let st = unsafe { emdkit_decompose(y.as_ptr(), y.len(), 100.0, EmdkitVariant::Emd, &opts, &mut h) };
    assert_eq!(st, EmdkitStatus::InvalidArgument);
    assert!(!last_error().is_empty());

    let nan = [f64::NAN; 16];
    let st = unsafe { emdkit_decompose(nan.as_ptr(), 16, 1.0, EmdkitVariant::Emd, ptr::null(), &mut h) };
    assert_eq!(st, EmdkitStatus::InvalidArgument);

    unsafe {
        emdkit_decomposition_free(ptr::null_mut());
        assert_eq!(emdkit_decomposition_imf_count(ptr::null()), 0);
    }
}

#[test]
fn analytic_signal_of_cosine() {
    let fs = 1000.0;
    let x: Vec<f64> = (0..2000).map(|i| (2.0 * PI * 50.0 * i as f64 / fs).cos()).collect();
    let mut amp = vec![0.0; x.len()];
    let mut freq = vec![0.0; x.len()];
    let st = unsafe { emdkit_analytic_signal(x.as_ptr(), x.len(), fs, amp.as_mut_ptr(), freq.as_mut_ptr()) };
    assert_eq!(st, EmdkitStatus::Ok);
    for i in 200..1800 {
        assert!((amp[i] - 1.0).abs() < 0.01);
        assert!((freq[i] - 50.0).abs() < 0.25);
    }
    let st = unsafe { emdkit_analytic_signal(x.as_ptr(), 4, fs, ptr::null_mut(), ptr::null_mut()) };
    assert_eq!(st, EmdkitStatus::InsufficientData);
}

#[test]
fn version_string() {
    let v = unsafe { CStr::from_ptr(emdkit_version()) };
    assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
}

fn header_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("include")
}

fn staticlib() -> Option<PathBuf> {
    let exe = std::env::current_exe().ok()?;
    let dir = exe.parent()?.parent()?;
    let lib = dir.join("libemdkit_ffi.a");
    lib.exists().then_some(lib)
}

#[test]
fn header_compiles_and_links_from_c() {
    let Ok(cc) = std::env::var("CC").or_else(|_| which("cc").ok_or(())) else {
        eprintln!("no C compiler found; skipping");
        return;
    };
    let tmp = tempfile::tempdir().unwrap();
    let src = tmp.path().join("smoke.c");
    std::fs::write(&src, include_str!("smoke.c")).unwrap();
    let status = Command::new(&cc)
        .args(["-std=c99", "-Wall", "-Werror", "-fsyntax-only", "-I"])
        .arg(header_dir())
        .arg(&src)
        .status()
        .unwrap();
    assert!(status.success(), "header does not compile");

    let Some(lib) = staticlib() else {
        eprintln!("static library not built; link step skipped");
        return;
    };
    let bin = tmp.path().join("smoke");
    let status = Command::new(&cc)
        .args(["-std=c99", "-I"])
        .arg(header_dir())
        .arg(&src)
        .arg(&lib)
        .args(["-lm", "-lpthread", "-ldl", "-o"])
        .arg(&bin)
        .status()
        .unwrap();
    assert!(status.success(), "link failed");
    let out = Command::new(&bin).output().unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(String::from_utf8_lossy(&out.stdout).contains("ok"));
}

fn which(name: &str) -> Option<String> {
    std::env::var_os("PATH")?
        .to_str()?
        .split(':')
        .map(|d| Path::new(d).join(name))
        .find(|p| p.exists())
        .map(|p| p.to_string_lossy().into_owned())
}
