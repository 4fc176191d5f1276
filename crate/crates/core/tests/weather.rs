//! Weather files, the synthetic climate and the season window.

use panelsim::weather::{
    heating_season_filter, load_weather_csv, read_weather_csv, synthesize_climate, write_weather_csv,
    ClimateParams,
};
use panelsim::Error;

const HEADER: &str = "timestamp,dry_bulb_c,ghi_wm2,wind_ms\n";

fn short_year() -> ClimateParams {
    ClimateParams::default()
}

#[test]
fn csv_round_trip_is_lossless() {
    let s = synthesize_climate(7, &short_year()).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("w.csv");
    write_weather_csv(&s, &path).unwrap();
    let back = load_weather_csv(&path).unwrap();
    assert_eq!(back.records(), s.records());
    assert_eq!(back.step(), 3600);
}

#[test]
fn bad_value_reports_its_line() {
    let text = format!(
        "{HEADER}2011-01-01T00:00,1.0,0,2\n2011-01-01T01:00,cold,0,2\n2011-01-01T02:00,1.0,0,2\n"
    );
    match read_weather_csv(text.as_bytes(), "mem".into()).unwrap_err() {
        Error::WeatherRow { line, .. } => assert_eq!(line, 3),
        e => panic!("unexpected {e}"),
    }
}

#[test]
fn out_of_range_value_is_rejected() {
    let text = format!("{HEADER}2011-01-01T00:00,1.0,-5,2\n");
    assert!(matches!(
        read_weather_csv(text.as_bytes(), "mem".into()),
        Err(Error::WeatherRow { line: 2, .. })
    ));
}

#[test]
fn wrong_header_is_line_one() {
    let text = "time,t,g,w\n2011-01-01T00:00,1.0,0,2\n";
    assert!(matches!(
        read_weather_csv(text.as_bytes(), "mem".into()),
        Err(Error::WeatherRow { line: 1, .. })
    ));
}

#[test]
fn gaps_are_rejected() {
    let text = format!("{HEADER}2011-01-01T00:00,1,0,2\n2011-01-01T01:00,1,0,2\n2011-01-01T03:00,1,0,2\n");
    let err = read_weather_csv(text.as_bytes(), "mem".into()).unwrap_err();
    assert!(matches!(err, Error::Weather(_)), "{err}");
    assert!(err.is_validation());
}

#[test]
fn missing_file_is_an_io_error() {
    let err = load_weather_csv("/nonexistent/weather.csv").unwrap_err();
    assert!(matches!(err, Error::Io { .. }));
    assert!(!err.is_validation());
}

#[test]
fn synthetic_climate_is_seed_deterministic() {
    let p = short_year();
    let a = synthesize_climate(42, &p).unwrap();
    let b = synthesize_climate(42, &p).unwrap();
    let c = synthesize_climate(43, &p).unwrap();
    assert_eq!(a.records(), b.records());
    assert_ne!(a.records(), c.records());
}

#[test]
fn season_runs_from_mid_october_to_mid_april() {
    let s = synthesize_climate(42, &short_year()).unwrap();
    let season = heating_season_filter(&s).unwrap();
    assert_eq!(season.len(), 183 * 24);
    assert_eq!(season.start().format("%m-%d %H:%M").to_string(), "10-15 00:00");
    assert_eq!(season.end().format("%m-%d %H:%M").to_string(), "04-16 00:00");
    let jan: Vec<_> = season.month(1).collect();
    assert_eq!(jan.len(), 31 * 24);
    let mean = jan.iter().map(|r| r.dry_bulb).sum::<f64>() / jan.len() as f64;
    assert!(mean < season.mean_dry_bulb());
}
