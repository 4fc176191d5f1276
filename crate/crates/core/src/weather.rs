//! Outdoor boundary conditions: CSV ingestion, a synthetic continental
//! climate, the heating-season window and the boiler design day.
//!
//! The CSV format has the header `timestamp,dry_bulb_c,ghi_wm2,wind_ms` and
//! ISO-8601 local timestamps at minute resolution (`2011-01-01T00:00`). A
//! record holds for the interval that starts at its timestamp.

use std::f64::consts::PI;
use std::fs::File;
use std::io::Write;
use std::path::Path;

use chrono::{Datelike, Duration, NaiveDate, NaiveDateTime, Timelike};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::Location;

pub const CSV_HEADER: [&str; 4] = ["timestamp", "dry_bulb_c", "ghi_wm2", "wind_ms"];
const TIMESTAMP_FORMAT: &str = "%Y-%m-%dT%H:%M";

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeatherRecord {
    pub timestamp: NaiveDateTime,
    /// °C
    pub dry_bulb: f64,
    /// W/m²
    pub global_horizontal: f64,
    /// m/s
    pub wind_speed: f64,
}

impl WeatherRecord {
    fn check(&self) -> std::result::Result<(), String> {
        if !(-50.0..=60.0).contains(&self.dry_bulb) {
            return Err(format!("dry bulb {} °C outside [-50, 60]", self.dry_bulb));
        }
        if !(self.global_horizontal >= 0.0 && self.global_horizontal.is_finite()) {
            return Err(format!("negative irradiance {}", self.global_horizontal));
        }
        if !(self.wind_speed >= 0.0 && self.wind_speed.is_finite()) {
            return Err(format!("negative wind speed {}", self.wind_speed));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct WeatherMetadata {
    pub location: Option<Location>,
    pub source: String,
}

/// Uniformly stepped weather records.
#[derive(Debug, Clone, PartialEq)]
pub struct WeatherSeries {
    records: Vec<WeatherRecord>,
    step: i64,
    pub metadata: WeatherMetadata,
}

impl WeatherSeries {
    /// Check ranges and the constant step. `step` (s) is only consulted for
    /// single-record series; otherwise it is inferred.
    pub fn new(records: Vec<WeatherRecord>, step: i64, metadata: WeatherMetadata) -> Result<Self> {
        if records.is_empty() {
            return Err(Error::Weather("series has no records".into()));
        }
        for r in &records {
            r.check().map_err(|m| Error::Weather(format!("{}: {m}", fmt_ts(r.timestamp))))?;
        }
        let step = match records.get(1) {
            Some(second) => (second.timestamp - records[0].timestamp).num_seconds(),
            None => step,
        };
        if step <= 0 {
            return Err(Error::Weather(format!("step must be positive, got {step} s")));
        }
        for pair in records.windows(2) {
            let gap = (pair[1].timestamp - pair[0].timestamp).num_seconds();
            if gap != step {
                return Err(Error::Weather(format!(
                    "expected a record at {} (step {step} s), next record is {}",
                    fmt_ts(pair[0].timestamp + Duration::seconds(step)),
                    fmt_ts(pair[1].timestamp)
                )));
            }
        }
        Ok(Self { records, step, metadata })
    }

    pub fn records(&self) -> &[WeatherRecord] {
        &self.records
    }

    /// s
    pub fn step(&self) -> i64 {
        self.step
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn start(&self) -> NaiveDateTime {
        self.records[0].timestamp
    }

    /// End of the last record's interval.
    pub fn end(&self) -> NaiveDateTime {
        self.records[self.records.len() - 1].timestamp + Duration::seconds(self.step)
    }

    pub fn mean_dry_bulb(&self) -> f64 {
        self.records.iter().map(|r| r.dry_bulb).sum::<f64>() / self.records.len() as f64
    }

    /// Records whose timestamp falls in calendar `month`.
    pub fn month(&self, month: u32) -> impl Iterator<Item = &WeatherRecord> {
        self.records.iter().filter(move |r| r.timestamp.month() == month)
    }
}

fn fmt_ts(t: NaiveDateTime) -> String {
    t.format(TIMESTAMP_FORMAT).to_string()
}

fn parse_ts(s: &str) -> Option<NaiveDateTime> {
    NaiveDateTime::parse_from_str(s, TIMESTAMP_FORMAT)
        .or_else(|_| NaiveDateTime::parse_from_str(s, "%Y-%m-%dT%H:%M:%S"))
        .ok()
}

pub fn load_weather_csv(path: impl AsRef<Path>) -> Result<WeatherSeries> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let source = path.display().to_string();
    read_weather_csv(file, source)
}

/// Parse weather CSV from any reader. Errors carry 1-based file line numbers.
pub fn read_weather_csv(reader: impl std::io::Read, source: String) -> Result<WeatherSeries> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let header = rdr
        .headers()
        .map_err(|e| Error::WeatherRow { line: 1, message: e.to_string() })?
        .clone();
    if header.iter().ne(CSV_HEADER) {
        return Err(Error::WeatherRow {
            line: 1,
            message: format!("expected header `{}`", CSV_HEADER.join(",")),
        });
    }

    let mut records = Vec::new();
    for row in rdr.records() {
        let row = row.map_err(|e| Error::WeatherRow {
            line: e.position().map_or(0, |p| p.line() as usize),
            message: e.to_string(),
        })?;
        let line = row.position().map_or(0, |p| p.line() as usize);
        let bad = |message: String| Error::WeatherRow { line, message };
        let timestamp = parse_ts(&row[0])
            .ok_or_else(|| bad(format!("cannot parse timestamp '{}'", &row[0])))?;
        let num = |i: usize| -> Result<f64> {
            row[i]
                .parse::<f64>()
                .map_err(|_| bad(format!("{} is not a number: '{}'", CSV_HEADER[i], &row[i])))
        };
        let record = WeatherRecord {
            timestamp,
            dry_bulb: num(1)?,
            global_horizontal: num(2)?,
            wind_speed: num(3)?,
        };
        record.check().map_err(bad)?;
        if let Some(prev) = records.last().map(|r: &WeatherRecord| r.timestamp) {
            if timestamp <= prev {
                return Err(bad(format!("timestamp {} does not increase", fmt_ts(timestamp))));
            }
        }
        records.push(record);
    }
    WeatherSeries::new(records, 3600, WeatherMetadata { location: None, source })
}

pub fn write_weather_csv(series: &WeatherSeries, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut out = std::io::BufWriter::new(File::create(path).map_err(|e| Error::io(path, e))?);
    let mut write = || -> std::io::Result<()> {
        writeln!(out, "{}", CSV_HEADER.join(","))?;
        for r in &series.records {
            writeln!(
                out,
                "{},{},{},{}",
                fmt_ts(r.timestamp),
                r.dry_bulb,
                r.global_horizontal,
                r.wind_speed
            )?;
        }
        out.flush()
    };
    write().map_err(|e| Error::io(path, e))
}

/// Parameters of the synthetic climate. Defaults describe a continental
/// temperate site like Kragujevac; they are assumptions, not measurements.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ClimateParams {
    /// Calendar year generated, Jan 1 to Dec 31.
    pub year: i32,
    /// s
    pub step: i64,
    /// °C
    pub annual_mean: f64,
    /// K
    pub annual_amplitude: f64,
    /// K
    pub diurnal_amplitude: f64,
    /// Day of year of the coldest day.
    pub coldest_day: f64,
    /// Local hour of the daily maximum.
    pub warmest_hour: f64,
    /// Standard deviation of the temperature noise, K.
    pub noise_sigma: f64,
    /// Lag-one autocorrelation of the hourly noise.
    pub noise_persistence: f64,
    /// Mean daily clearness index.
    pub clearness: f64,
    /// Half-width of the uniform daily clearness spread.
    pub clearness_spread: f64,
    /// m/s
    pub mean_wind: f64,
    pub location: Location,
    /// Hours ahead of UTC of the local clock.
    pub utc_offset: f64,
}

impl Default for ClimateParams {
    fn default() -> Self {
        Self {
            year: 2011,
            step: 3600,
            annual_mean: 11.0,
            annual_amplitude: 11.0,
            diurnal_amplitude: 5.0,
            coldest_day: 15.0,
            warmest_hour: 15.0,
            noise_sigma: 2.5,
            noise_persistence: 0.9,
            clearness: 0.5,
            clearness_spread: 0.25,
            mean_wind: 2.0,
            location: Location::default(),
            utc_offset: 1.0,
        }
    }
}

impl ClimateParams {
    /// Deterministic part of the dry bulb: annual plus diurnal cosine, °C.
    /// `day` is the zero-based day of year, `hour` the local clock hour.
    pub fn smooth_dry_bulb(&self, day: f64, hour: f64) -> f64 {
        self.annual_mean
            - self.annual_amplitude * (2.0 * PI * (day - self.coldest_day) / 365.0).cos()
            + self.diurnal_amplitude * (2.0 * PI * (hour - self.warmest_hour) / 24.0).cos()
    }

    /// Clear-sky horizontal irradiance scaled by `clearness`, W/m².
    fn irradiance(&self, day: f64, hour: f64, clearness: f64) -> f64 {
        let lat = self.location.latitude.to_radians();
        let decl = (23.45f64).to_radians() * (2.0 * PI * (284.0 + day + 1.0) / 365.0).sin();
        let solar_hour = hour + (self.location.longitude - 15.0 * self.utc_offset) / 15.0;
        let omega = (15.0 * (solar_hour - 12.0)).to_radians();
        let sin_alt = lat.sin() * decl.sin() + lat.cos() * decl.cos() * omega.cos();
        let extraterrestrial = 1367.0 * (1.0 + 0.033 * (2.0 * PI * (day + 1.0) / 365.0).cos());
        (extraterrestrial * sin_alt * clearness).max(0.0)
    }
}

/// One year of synthetic weather. The same seed always gives the same series.
pub fn synthesize_climate(seed: u64, params: &ClimateParams) -> Result<WeatherSeries> {
    if params.step <= 0 {
        return Err(Error::Weather(format!("step must be positive, got {} s", params.step)));
    }
    if !(params.noise_sigma >= 0.0) || !(0.0..1.0).contains(&params.noise_persistence) {
        return Err(Error::Weather("noise needs sigma ≥ 0 and persistence in [0, 1)".into()));
    }
    let start = NaiveDate::from_ymd_opt(params.year, 1, 1)
        .ok_or_else(|| Error::Weather(format!("invalid year {}", params.year)))?
        .and_hms_opt(0, 0, 0)
        .expect("midnight exists");
    let end = start.with_year(params.year + 1).expect("Jan 1 exists in every year");

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let rho = params.noise_persistence;
    // innovation scaled so the stationary standard deviation is noise_sigma
    let innovation = Normal::new(0.0, params.noise_sigma * (1.0 - rho * rho).sqrt())
        .map_err(|e| Error::Weather(e.to_string()))?;
    let gust = Normal::new(0.0, 0.5 * params.mean_wind).map_err(|e| Error::Weather(e.to_string()))?;

    let mut noise = 0.0;
    let mut clearness = params.clearness;
    let mut current_day = u32::MAX;
    let mut records = Vec::new();
    let mut t = start;
    while t < end {
        let day = f64::from(t.ordinal0());
        let hour = f64::from(t.num_seconds_from_midnight()) / 3600.0;
        if t.ordinal0() != current_day {
            current_day = t.ordinal0();
            let u: f64 = rng.random_range(-1.0..=1.0);
            clearness = (params.clearness + params.clearness_spread * u).clamp(0.0, 1.0);
        }
        let step_h = params.step as f64 / 3600.0;
        records.push(WeatherRecord {
            timestamp: t,
            dry_bulb: (params.smooth_dry_bulb(day, hour) + noise).clamp(-50.0, 60.0),
            global_horizontal: params.irradiance(day, hour + 0.5 * step_h, clearness),
            wind_speed: (params.mean_wind + gust.sample(&mut rng)).max(0.0),
        });
        noise = rho * noise + innovation.sample(&mut rng);
        t += Duration::seconds(params.step);
    }
    WeatherSeries::new(
        records,
        params.step,
        WeatherMetadata {
            location: Some(params.location),
            source: format!("synthetic, seed {seed}"),
        },
    )
}

fn season_start(year: i32) -> NaiveDateTime {
    NaiveDate::from_ymd_opt(year, 10, 15)
        .and_then(|d| d.and_hms_opt(0, 0, 0))
        .expect("Oct 15 exists")
}

fn season_end(start_year: i32) -> NaiveDateTime {
    NaiveDate::from_ymd_opt(start_year + 1, 4, 16)
        .and_then(|d| d.and_hms_opt(0, 0, 0))
        .expect("Apr 16 exists")
}

/// Keep the records of one heating season, Oct 15 00:00 to Apr 15 24:00.
///
/// A series that spans a whole season yields its first complete one. A single
/// calendar year is treated like a typical-year file and wrapped: Oct 15 to
/// Dec 31 is moved to the previous year and followed by Jan 1 to Apr 15.
pub fn heating_season_filter(s: &WeatherSeries) -> Result<WeatherSeries> {
    let first = s.start();
    let end = s.end();

    for y in (first.year() - 1)..=end.year() {
        let (from, to) = (season_start(y), season_end(y));
        if first <= from && end >= to {
            let records: Vec<_> = s
                .records
                .iter()
                .filter(|r| r.timestamp >= from && r.timestamp < to)
                .copied()
                .collect();
            return WeatherSeries::new(records, s.step, s.metadata.clone());
        }
    }

    for y in first.year()..=end.year() {
        let jan1 = NaiveDate::from_ymd_opt(y, 1, 1).and_then(|d| d.and_hms_opt(0, 0, 0));
        let next = NaiveDate::from_ymd_opt(y + 1, 1, 1).and_then(|d| d.and_hms_opt(0, 0, 0));
        let (Some(jan1), Some(next)) = (jan1, next) else { continue };
        if first <= jan1 && end >= next {
            let autumn = s
                .records
                .iter()
                .filter(|r| r.timestamp >= season_start(y) && r.timestamp < next)
                .map(|r| WeatherRecord {
                    timestamp: r.timestamp.with_year(y - 1).expect("autumn dates exist in every year"),
                    ..*r
                });
            let spring = s
                .records
                .iter()
                .filter(|r| r.timestamp >= jan1 && r.timestamp < season_end(y - 1));
            let records: Vec<_> = autumn.chain(spring.copied()).collect();
            if records.first().map(|r| r.timestamp) != Some(season_start(y - 1)) {
                break;
            }
            return WeatherSeries::new(records, s.step, s.metadata.clone());
        }
    }

    Err(Error::Weather(format!(
        "series {} to {} covers neither a full heating season nor a full calendar year",
        fmt_ts(first),
        fmt_ts(end)
    )))
}

/// Constant-temperature, sunless day used to size the boiler.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DesignDay {
    /// °C
    pub dry_bulb: f64,
    /// s
    pub duration: f64,
}

impl DesignDay {
    pub fn new(dry_bulb: f64) -> Self {
        Self {
            dry_bulb,
            duration: 86_400.0,
        }
    }

    /// Check the design temperature is below the mean of `season`.
    pub fn check_against(&self, season: &WeatherSeries) -> Result<()> {
        let mean = season.mean_dry_bulb();
        if self.dry_bulb < mean {
            Ok(())
        } else {
            Err(Error::Weather(format!(
                "design dry bulb {} °C is not below the season mean {mean:.2} °C",
                self.dry_bulb
            )))
        }
    }
}
