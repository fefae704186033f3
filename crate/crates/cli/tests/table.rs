use qndsim_cli::table::{format_number, parse_csv, value_stderr_table, Field, Table};
use qndsim_core::estimators::Cell;

#[test]
fn fifteen_significant_digits() {
    assert_eq!(format_number(0.0), "0");
    assert_eq!(format_number(-0.0), "0");
    assert_eq!(format_number(0.5), "0.5");
    assert_eq!(format_number(1.0 / 3.0), "0.333333333333333");
    assert_eq!(format_number(2.0 / 3.0), "0.666666666666667");
    assert_eq!(format_number(65.11811189804621), "65.1181118980462");
    assert_eq!(format_number(5.6e-5), "5.6e-5");
    assert_eq!(format_number(1.0e20), "1e20");
    assert_eq!(format_number(f64::NAN), "");
    assert_eq!(format_number(f64::INFINITY), "inf");
}

#[test]
fn formatted_values_agree_to_1e_minus_12() {
    for &x in &[0.123456789012345678, 7.0e-3, 0.9999999999999999, 1234.5678901234567, 3.0e-9] {
        let y: f64 = format_number(x).parse().unwrap();
        assert!((x - y).abs() <= 1e-12 * x.abs().max(1e-300) + 1e-300, "{x} -> {y}");
        let digits = format_number(x).chars().filter(|c| c.is_ascii_digit()).count();
        assert!(digits <= 15 + 3, "{x}: {}", format_number(x));
    }
}

#[test]
fn value_and_stderr_columns() {
    let t = value_stderr_table(
        &["a", "b"],
        vec![(0.1, vec![Cell::exact(0.25), Cell::absent()]), (0.2, vec![Cell::estimate(0.5, 0.01), Cell::exact(1.0)])],
    );
    let csv = t.to_csv();
    assert_eq!(csv, "mu,a,b,a_stderr,b_stderr\n0.1,0.25,,0,\n0.2,0.5,1,0.01,0\n");
    let back = parse_csv(&csv).unwrap();
    assert_eq!(back.header.len(), 5);
    assert_eq!(back.rows[0][2], "");
}

#[test]
fn ragged_csv_is_rejected() {
    assert!(parse_csv("a,b\n1\n").is_none());
    let mut t = Table::new(["x", "label"]);
    t.push(vec![1.0.into(), Field::Text("up1".into())]);
    assert_eq!(t.to_csv(), "x,label\n1,up1\n");
}
