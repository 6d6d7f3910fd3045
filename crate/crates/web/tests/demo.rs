use ginsew_web::{injection_curve_value, Demo};

#[test]
fn marked_student_stands_out_only_under_its_key() {
    let demo = Demo::build(3, 0.2, 6000, 300).unwrap();
    let snr = |marked, wrong| demo.report(marked, wrong).unwrap()["p_snr"].as_f64().unwrap();
    let right = snr(true, false);
    assert!(right > 4.0, "{right}");
    assert!(snr(true, true) < right / 2.0);
    assert!(snr(false, false) < right / 2.0);

    let r = demo.report(true, false).unwrap();
    let points = r["points"].as_array().unwrap();
    assert_eq!(points.len() as u64, r["n_pairs_kept"].as_u64().unwrap().min(4000));
    assert!(points.iter().all(|p| p[1].as_f64().unwrap() > 0.6));
    assert_eq!(
        r["freqs"].as_array().unwrap().len(),
        r["power"].as_array().unwrap().len()
    );
}

#[test]
fn injection_curve_is_a_shifted_cosine() {
    let v = injection_curve_value(0.2, 0.5, 200).unwrap();
    let t = v["t"].as_array().unwrap();
    let q = v["q1"].as_array().unwrap();
    assert_eq!(t.len(), 200);
    for (t, q) in t.iter().zip(q) {
        let (t, q) = (t.as_f64().unwrap(), q.as_f64().unwrap());
        let want = (0.5 + 0.2 * (1.0 + (16.0 * t).cos())) / 1.4;
        assert!((q - want).abs() < 1e-12);
    }
    assert!(injection_curve_value(-0.1, 0.5, 10).is_err());
    assert!(injection_curve_value(0.1, 1.5, 10).is_err());
}
