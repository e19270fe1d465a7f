use fqbarrier_ffi::*;
use std::ffi::CStr;
use std::path::PathBuf;
use std::process::Command;
use std::ptr;

fn bs() -> FqbModel {
    FqbModel {
        kind: FqbModelKind::BlackScholes,
        r: 0.15,
        sigma: 0.07,
        vartheta: 0.0,
        delta: 0.0,
        x0: 100.0,
    }
}

fn uoc(barrier: f64) -> FqbContract {
    FqbContract {
        barrier_type: FqbBarrier::UpAndOut,
        payoff: FqbPayoff::Call,
        strike: 100.0,
        barrier,
        maturity: 1.0,
    }
}

fn last_error() -> String {
    unsafe { CStr::from_ptr(fqb_last_error_message()) }.to_string_lossy().into_owned()
}

#[test]
fn chain_lifecycle_and_prices() {
    let mut chain = ptr::null_mut();
    let s = unsafe { fqb_chain_new(&bs(), 1.0, 10, 1000, 4, &mut chain) };
    assert_eq!(s, FqbStatus::Ok);
    assert!(!chain.is_null());
    assert_eq!(unsafe { fqb_chain_levels(chain) }, 966);
    let mut p = FqbQuantPrice::default();
    assert_eq!(unsafe { fqb_chain_price(chain, &uoc(115.0), &mut p) }, FqbStatus::Ok);
    assert!((p.call - 2.59).abs() < 0.05, "{}", p.call);
    assert!(p.survival > 0.0 && p.survival < 1.0);
    assert_eq!(unsafe { fqb_chain_price(chain, &uoc(100.0), &mut p) }, FqbStatus::Ok);
    assert_eq!(p.call, 0.0);
    let mut c = uoc(115.0);
    c.maturity = 2.0;
    assert_eq!(unsafe { fqb_chain_price(chain, &c, &mut p) }, FqbStatus::InvalidArgument);
    assert!(last_error().contains("maturity"));
    unsafe { fqb_chain_free(chain) };
    unsafe { fqb_chain_free(ptr::null_mut()) };
    assert_eq!(unsafe { fqb_chain_levels(ptr::null()) }, 0);
}

#[test]
fn error_codes() {
    let mut chain = ptr::null_mut();
    assert_eq!(unsafe { fqb_chain_new(ptr::null(), 1.0, 10, 1000, 4, &mut chain) }, FqbStatus::NullPointer);
    assert!(chain.is_null());
    let mut bad = bs();
    bad.sigma = -1.0;
    assert_eq!(unsafe { fqb_chain_new(&bad, 1.0, 10, 1000, 4, &mut chain) }, FqbStatus::InvalidArgument);
    assert!(!last_error().is_empty());
    let pcev = FqbModel {
        kind: FqbModelKind::PseudoCev,
        vartheta: 0.7,
        delta: 0.5,
        ..bs()
    };
    let mut x = 0.0;
    assert_eq!(unsafe { fqb_closed_form(&pcev, &uoc(115.0), &mut x) }, FqbStatus::Unsupported);
    assert!(last_error().contains("pseudo-CEV"));
    assert_eq!(unsafe { fqb_closed_form(&bs(), &uoc(115.0), ptr::null_mut()) }, FqbStatus::NullPointer);
    let mut pts = [0.0; 2];
    assert_eq!(
        unsafe { fqb_normal_quantizer(3, pts.as_mut_ptr(), ptr::null_mut(), 2, ptr::null_mut()) },
        FqbStatus::BufferTooSmall
    );
    // a success clears the message
    assert_eq!(unsafe { fqb_closed_form(&bs(), &uoc(115.0), &mut x) }, FqbStatus::Ok);
    assert_eq!(last_error(), "");
}

#[test]
fn closed_form_and_monte_carlo() {
    let mut x = 0.0;
    assert_eq!(unsafe { fqb_closed_form(&bs(), &uoc(115.0), &mut x) }, FqbStatus::Ok);
    assert!((x - 2.58).abs() < 0.01);
    let mut a = FqbMcResult::default();
    let mut b = FqbMcResult::default();
    let c = uoc(120.0);
    assert_eq!(unsafe { fqb_rbb_price(&bs(), &c, 20, 20_000, 5, FqbEstimator::Indicator, &mut a) }, FqbStatus::Ok);
    assert_eq!(unsafe { fqb_rbb_price(&bs(), &c, 20, 20_000, 5, FqbEstimator::Indicator, &mut b) }, FqbStatus::Ok);
    assert_eq!(a.price.to_bits(), b.price.to_bits());
    assert!((a.std_error - (a.sample_variance / 20_000.0).sqrt()).abs() < 1e-12);
    assert_eq!(
        unsafe { fqb_rbb_price(&bs(), &c, 0, 20_000, 5, FqbEstimator::Conditional, &mut a) },
        FqbStatus::InvalidArgument
    );
}

#[test]
fn normal_quantizer() {
    let mut pts = [0.0; 2];
    let mut w = [0.0; 2];
    let mut d = 0.0;
    assert_eq!(unsafe { fqb_normal_quantizer(2, pts.as_mut_ptr(), w.as_mut_ptr(), 2, &mut d) }, FqbStatus::Ok);
    let a = (2.0 / std::f64::consts::PI).sqrt();
    assert!((pts[1] - a).abs() < 1e-9 && (pts[0] + a).abs() < 1e-9);
    assert_eq!(w, [0.5, 0.5]);
    assert!((d - (1.0 - 2.0 / std::f64::consts::PI)).abs() < 1e-9);
    assert!(!unsafe { CStr::from_ptr(fqb_version()) }.to_bytes().is_empty());
}

fn header() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("include/fqbarrier.h")
}

#[test]
fn header_is_generated_and_compiles() {
    let text = std::fs::read_to_string(header()).unwrap();
    for name in [
        "fqb_chain_new",
        "fqb_chain_price",
        "fqb_chain_free",
        "fqb_closed_form",
        "fqb_rbb_price",
        "fqb_normal_quantizer",
        "fqb_last_error_message",
        "typedef struct FqbChain FqbChain",
        "FQB_STATUS_OK = 0",
    ] {
        assert!(text.contains(name), "{name} missing from header");
    }
    let Ok(cc) = Command::new("cc").arg("--version").output() else {
        eprintln!("no C compiler, syntax check skipped");
        return;
    };
    assert!(cc.status.success());
    for lang in ["c", "c++"] {
        let out = Command::new("cc")
            .args(["-x", lang, "-fsyntax-only", "-Wall", "-Werror"])
            .arg(header())
            .output()
            .unwrap();
        assert!(out.status.success(), "{lang}: {}", String::from_utf8_lossy(&out.stderr));
    }
}

#[test]
fn c_program_links_against_static_library() {
    // target/<profile>/deps/<test binary>
    let exe = std::env::current_exe().unwrap();
    let profile_dir = exe.parent().and_then(|d| d.parent()).unwrap();
    let lib = profile_dir.join("libfqbarrier_ffi.a");
    if !lib.exists() || Command::new("cc").arg("--version").output().is_err() {
        eprintln!("static library or C compiler unavailable, skipped");
        return;
    }
    let dir = tempfile_dir();
    let bin = dir.join("price_barrier");
    let src = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("examples/price_barrier.c");
    let out = Command::new("cc")
        .arg(&src)
        .arg("-I")
        .arg(header().parent().unwrap())
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&bin)
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let run = Command::new(&bin).output().unwrap();
    assert!(run.status.success(), "{}", String::from_utf8_lossy(&run.stderr));
    let text = String::from_utf8(run.stdout).unwrap();
    let value = |key: &str| -> f64 {
        let line = text.lines().find(|l| l.starts_with(key)).unwrap();
        line.split_whitespace().nth(1).unwrap().parse().unwrap()
    };
    assert!((value("closed") - 2.5773).abs() < 1e-4);
    assert!((value("quant") - 2.59).abs() < 0.05);
    assert!(text.contains("error closed form unavailable for pseudo-CEV"));
    let _ = std::fs::remove_dir_all(dir);
}

fn tempfile_dir() -> PathBuf {
    let d = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join(format!("capi-{}", std::process::id()));
    std::fs::create_dir_all(&d).unwrap();
    d
}
