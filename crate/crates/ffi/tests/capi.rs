use std::ffi::{CStr, CString};
use std::ptr;

use anonsim_ffi::*;

fn last_error() -> String {
    let p = anonsim_last_error();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

unsafe fn take(s: *mut std::ffi::c_char) -> String {
    let out = CStr::from_ptr(s).to_string_lossy().into_owned();
    anonsim_string_free(s);
    out
}

#[test]
fn generate_assign_and_emit() {
    let spec = CString::new(r#"{"generator": "quasi4", "n": 40}"#).unwrap();
    unsafe {
        let mut t = ptr::null_mut();
        assert_eq!(anonsim_topology_generate(spec.as_ptr(), 7, &mut t), AnonsimStatus::Ok);
        assert_eq!(anonsim_topology_node_count(t), 40);
        assert!(anonsim_topology_edge_count(t) > 0);

        let mut a = ptr::null_mut();
        let st = anonsim_topology_assign_adversaries(t, AnonsimStrategy::Random, 4, 3, &mut a);
        assert_eq!(st, AnonsimStatus::Ok);
        let adv = (0..40).filter(|&i| anonsim_topology_is_adversarial(a, i)).count();
        assert_eq!(adv, 4);
        assert!(!anonsim_topology_is_adversarial(a, 40));

        let mut doc = ptr::null_mut();
        assert_eq!(anonsim_topology_emit_snapshot(a, true, &mut doc), AnonsimStatus::Ok);
        let doc = take(doc);
        assert!(doc.contains("adversarial"));

        anonsim_topology_free(a);
        anonsim_topology_free(t);
    }
}

#[test]
fn bad_arguments_report_codes() {
    unsafe {
        let mut t = ptr::null_mut();
        assert_eq!(anonsim_topology_generate(ptr::null(), 1, &mut t), AnonsimStatus::NullArgument);
        assert!(last_error().contains("spec_json"));

        let junk = CString::new("{not json").unwrap();
        assert_eq!(anonsim_topology_generate(junk.as_ptr(), 1, &mut t), AnonsimStatus::Parse);

        let zero = CString::new(r#"{"generator": "line", "n": 0}"#).unwrap();
        assert_eq!(anonsim_topology_generate(zero.as_ptr(), 1, &mut t), AnonsimStatus::InvalidParameter);

        let cfg = CString::new("scheme = \"dandelion\"\n").unwrap();
        let mut c = ptr::null_mut();
        assert_eq!(anonsim_config_parse(cfg.as_ptr(), ptr::null(), &mut c), AnonsimStatus::Config);
        assert!(last_error().contains("topology"));
    }
}

#[test]
fn entropy_functions() {
    let p = [0.5, 0.25, 0.25];
    let mut h = 0.0;
    unsafe {
        assert_eq!(anonsim_entropy_bits(p.as_ptr(), 3, &mut h), AnonsimStatus::Ok);
        assert!((h - 1.5).abs() < 1e-12);
        assert_eq!(anonsim_min_entropy_bits(p.as_ptr(), 3, &mut h), AnonsimStatus::Ok);
        assert!((h - 1.0).abs() < 1e-12);
        let bad = [0.5, 0.1];
        assert_ne!(anonsim_entropy_bits(bad.as_ptr(), 2, &mut h), AnonsimStatus::Ok);
    }
}

#[test]
fn stem_entropy_on_a_line() {
    // At p_f = 0 only the ring predecessor can have sent it.
    let spec = CString::new(r#"{"generator": "line", "n": 8}"#).unwrap();
    unsafe {
        let mut t = ptr::null_mut();
        assert_eq!(anonsim_topology_generate(spec.as_ptr(), 1, &mut t), AnonsimStatus::Ok);
        let mut a = ptr::null_mut();
        let st = anonsim_topology_assign_adversaries(t, AnonsimStrategy::TopDegree, 1, 1, &mut a);
        assert_eq!(st, AnonsimStatus::Ok);
        let j = (0..8).find(|&i| anonsim_topology_is_adversarial(a, i)).unwrap();
        let mut h = f64::NAN;
        // The ring is a random permutation; exactly one node can be j's predecessor.
        let preds: Vec<u32> = (0..8)
            .filter(|&p| anonsim_stem_entropy(a, AnonsimStemScheme::Dandelion, 0.0, j, p, &mut h) == AnonsimStatus::Ok)
            .collect();
        assert_eq!(preds.len(), 1);
        let pred = preds[0];
        assert_eq!(anonsim_stem_entropy(a, AnonsimStemScheme::Dandelion, 0.0, j, pred, &mut h), AnonsimStatus::Ok);
        assert_eq!(h, 0.0);
        let st = anonsim_stem_entropy(a, AnonsimStemScheme::Dandelion, 0.5, j, pred, &mut h);
        assert_eq!(st, AnonsimStatus::Ok);
        assert!(h > 0.0);
        anonsim_topology_free(a);
        anonsim_topology_free(t);
    }
}

const CONFIG: &str = "scheme = \"dandelion\"\nseed = 5\np_f = 0.5\nruns = 4\n\
[topology]\ngenerator = \"line\"\nn = 30\n[adversary]\nstrategy = \"random\"\ncount = 3\n";

#[test]
fn run_render_and_write() {
    let cfg = CString::new(CONFIG).unwrap();
    unsafe {
        let mut c = ptr::null_mut();
        assert_eq!(anonsim_config_parse(cfg.as_ptr(), ptr::null(), &mut c), AnonsimStatus::Ok, "{}", last_error());
        let mut r1 = ptr::null_mut();
        let mut r2 = ptr::null_mut();
        assert_eq!(anonsim_run(c, 1, &mut r1), AnonsimStatus::Ok, "{}", last_error());
        assert_eq!(anonsim_run(c, 3, &mut r2), AnonsimStatus::Ok);

        let (mut m1, mut x1, mut m2) = (ptr::null_mut(), ptr::null_mut(), ptr::null_mut());
        assert_eq!(anonsim_report_render(r1, AnonsimFormat::Csv, &mut m1, &mut x1), AnonsimStatus::Ok);
        assert_eq!(anonsim_report_render(r2, AnonsimFormat::Csv, &mut m2, ptr::null_mut()), AnonsimStatus::Ok);
        let (m1, x1, m2) = (take(m1), take(x1), take(m2));
        assert_eq!(m1, m2);
        assert!(m1.starts_with("run,observation,entropy_bits,min_entropy_bits,support\n"));
        assert!(x1.contains("intercept_fraction"));

        let f = anonsim_report_intercept_fraction(r1);
        assert!((0.0..=1.0).contains(&f));

        let dir = std::env::temp_dir().join(format!("anonsim-ffi-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("r.json");
        let p = CString::new(path.to_str().unwrap()).unwrap();
        assert_eq!(anonsim_report_write(r1, AnonsimFormat::Structured, p.as_ptr()), AnonsimStatus::Ok);
        let doc = std::fs::read_to_string(&path).unwrap();
        assert!(doc.contains("\"records\""));
        std::fs::remove_dir_all(&dir).unwrap();

        assert_eq!(anonsim_config_set_seed(c, 6), AnonsimStatus::Ok);
        anonsim_report_free(r1);
        anonsim_report_free(r2);
        anonsim_config_free(c);
    }
}

#[test]
fn frees_accept_null() {
    unsafe {
        anonsim_topology_free(ptr::null_mut());
        anonsim_config_free(ptr::null_mut());
        anonsim_report_free(ptr::null_mut());
        anonsim_string_free(ptr::null_mut());
    }
    let v = unsafe { CStr::from_ptr(anonsim_version()) };
    assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
}
