//! Standalone SVG charts drawn from the CSV tables.
//!
//! Every plotted value is parsed back from its table cell, and the cell
//! text is attached to the mark as `data-value`, so a chart never shows a
//! number the tables do not contain.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use crate::error::{CliError, Result};
use crate::report::ComparisonReport;
use crate::tables::{build_tables, Table};

const PALETTE: [&str; 6] = ["#4e79a7", "#f28e2b", "#59a14f", "#e15759", "#76b7b2", "#b07aa1"];
const LEFT: f64 = 80.0;
const RIGHT: f64 = 170.0;
const TOP: f64 = 50.0;
const BOTTOM: f64 = 130.0;
const PLOT_HEIGHT: f64 = 320.0;

/// One plotted value with the table text it came from.
#[derive(Debug, Clone, PartialEq)]
struct Point {
    value: f64,
    text: String,
}

#[derive(Debug, Clone, PartialEq)]
struct Series {
    name: String,
    /// One entry per category; `None` where the series has no value.
    points: Vec<Option<Point>>,
    dashed: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Style {
    Bars,
    Lines,
    Points,
}

#[derive(Debug, Clone, PartialEq)]
struct Chart {
    title: String,
    y_label: String,
    categories: Vec<String>,
    series: Vec<Series>,
    style: Style,
}

/// Write one SVG per table of `report` into `dir`. Returns their paths.
pub fn emit_charts(report: &ComparisonReport, dir: &Path) -> Result<Vec<PathBuf>> {
    let tables = build_tables(report)?;
    fs::create_dir_all(dir).map_err(CliError::io(dir))?;
    let mut paths = Vec::with_capacity(tables.len());
    for t in &tables {
        let chart = chart_for(t)?;
        let path = dir.join(format!("{}.svg", t.name));
        fs::write(&path, render(&chart)).map_err(CliError::io(&path))?;
        paths.push(path);
    }
    Ok(paths)
}

fn chart_for(t: &Table) -> Result<Chart> {
    match t.name {
        "energy" => grouped(t, "Season energy", "Energy (GJ)"),
        "cost" => grouped(t, "Season operating cost", "Cost (€)"),
        "boiler" => grouped(t, "Nominal boiler power", "Power (kW)"),
        "co2" => grouped(t, "Season CO₂ emission", "CO₂ (kg)"),
        "january_exergy" => grouped(t, "January exergy", "Exergy (GJ)"),
        "room_air" => by_item(t, "zone", "air_c", Some("setpoint_c"), "January mean room air", Style::Lines),
        "surface_temperatures" => by_item(
            t,
            "surface",
            "inside_face_c",
            None,
            "January mean inside face temperature",
            Style::Points,
        ),
        other => Err(CliError::Scenario(format!("no chart defined for table '{other}'"))),
    }
}

fn parse(t: &Table, text: &str) -> Result<Point> {
    let value = text
        .parse::<f64>()
        .map_err(|_| CliError::Scenario(format!("table '{}' holds non-numeric cell '{text}'", t.name)))?;
    Ok(Point {
        value,
        text: text.to_string(),
    })
}

/// Systems as groups, numeric columns as series.
fn grouped(t: &Table, title: &str, y_label: &str) -> Result<Chart> {
    let categories = t.rows.iter().map(|r| r[0].clone()).collect();
    let mut series = Vec::new();
    for (c, name) in t.header.iter().enumerate().skip(1) {
        let points = t
            .rows
            .iter()
            .map(|r| parse(t, &r[c]).map(Some))
            .collect::<Result<Vec<_>>>()?;
        series.push(Series {
            name: series_label(name),
            points,
            dashed: false,
        });
    }
    Ok(Chart {
        title: title.into(),
        y_label: y_label.into(),
        categories,
        series,
        style: Style::Bars,
    })
}

/// Items (zones or surfaces) along the x axis, one series per system.
fn by_item(
    t: &Table,
    item: &str,
    value: &str,
    reference: Option<&str>,
    title: &str,
    style: Style,
) -> Result<Chart> {
    let missing = |c: &str| CliError::Scenario(format!("table '{}' has no column '{c}'", t.name));
    let ic = t.column(item).ok_or_else(|| missing(item))?;
    let vc = t.column(value).ok_or_else(|| missing(value))?;
    let rc = match reference {
        Some(r) => Some(t.column(r).ok_or_else(|| missing(r))?),
        None => None,
    };

    let mut categories: Vec<String> = Vec::new();
    let mut systems: Vec<String> = Vec::new();
    for r in &t.rows {
        if !categories.contains(&r[ic]) {
            categories.push(r[ic].clone());
        }
        if !systems.contains(&r[0]) {
            systems.push(r[0].clone());
        }
    }
    let slot = |name: &str| categories.iter().position(|c| c == name).expect("category collected above");

    let mut series = Vec::new();
    if let Some(rc) = rc {
        // the reference line comes from the first row naming each item
        let mut points = vec![None; categories.len()];
        for r in &t.rows {
            let k = slot(&r[ic]);
            if points[k].is_none() {
                points[k] = Some(parse(t, &r[rc])?);
            }
        }
        series.push(Series {
            name: series_label(t.header[rc]),
            points,
            dashed: true,
        });
    }
    for sys in &systems {
        let mut points = vec![None; categories.len()];
        for r in t.rows.iter().filter(|r| &r[0] == sys) {
            points[slot(&r[ic])] = Some(parse(t, &r[vc])?);
        }
        series.push(Series {
            name: sys.clone(),
            points,
            dashed: false,
        });
    }
    Ok(Chart {
        title: title.into(),
        y_label: "Temperature (°C)".into(),
        categories,
        series,
        style,
    })
}

fn series_label(column: &str) -> String {
    let base = column
        .trim_end_matches("_gj")
        .trim_end_matches("_eur")
        .trim_end_matches("_kw")
        .trim_end_matches("_kg")
        .trim_end_matches("_c");
    base.replace('_', " ")
}

/// Axis range widened to whole multiples of a 1-2-5 step.
fn nice_axis(lo: f64, hi: f64) -> (f64, f64, f64) {
    let (lo, hi) = if hi - lo < 1e-9 { (lo - 1.0, hi + 1.0) } else { (lo, hi) };
    let raw = (hi - lo) / 5.0;
    let mag = 10f64.powf(raw.log10().floor());
    let step = [1.0, 2.0, 5.0, 10.0]
        .into_iter()
        .map(|m| m * mag)
        .find(|s| *s >= raw)
        .unwrap_or(10.0 * mag);
    ((lo / step).floor() * step, (hi / step).ceil() * step, step)
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

fn render(c: &Chart) -> String {
    let values = c.series.iter().flat_map(|s| s.points.iter().flatten().map(|p| p.value));
    let (mut lo, mut hi) = values.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)));
    if !lo.is_finite() {
        (lo, hi) = (0.0, 1.0);
    }
    if c.style == Style::Bars {
        lo = lo.min(0.0);
        hi = hi.max(0.0);
    }
    let (y0, y1, step) = nice_axis(lo, hi);
    let bars = if c.style == Style::Bars { c.series.len() } else { 0 };
    let band = (18.0 * bars as f64 + 16.0).max(22.0);
    let plot_w = (band * c.categories.len() as f64).max(360.0);
    let band = plot_w / c.categories.len().max(1) as f64;
    let width = LEFT + plot_w + RIGHT;
    let height = TOP + PLOT_HEIGHT + BOTTOM;
    let y_of = |v: f64| TOP + PLOT_HEIGHT * (y1 - v) / (y1 - y0);
    let x_mid = |k: usize| LEFT + band * (k as f64 + 0.5);
    let decimals = (-step.log10().floor()).max(0.0) as usize;

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width:.0}" height="{height:.0}" viewBox="0 0 {width:.0} {height:.0}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(s, "<title>{}</title>", escape(&c.title));
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<text x="{:.1}" y="28" font-size="16" text-anchor="middle">{}</text>"#,
        LEFT + plot_w / 2.0,
        escape(&c.title)
    );

    // y grid and tick labels
    let ticks = ((y1 - y0) / step).round() as usize;
    for i in 0..=ticks {
        let v = y0 + step * i as f64;
        let y = y_of(v);
        let _ = writeln!(
            s,
            r##"<line x1="{LEFT:.1}" y1="{y:.2}" x2="{:.1}" y2="{y:.2}" stroke="#dddddd"/>"##,
            LEFT + plot_w
        );
        let _ = writeln!(
            s,
            r#"<text x="{:.1}" y="{:.2}" text-anchor="end">{v:.decimals$}</text>"#,
            LEFT - 6.0,
            y + 4.0
        );
    }
    let _ = writeln!(
        s,
        r#"<text transform="translate(20 {:.1}) rotate(-90)" text-anchor="middle">{}</text>"#,
        TOP + PLOT_HEIGHT / 2.0,
        escape(&c.y_label)
    );
    let _ = writeln!(
        s,
        r#"<line x1="{LEFT:.1}" y1="{TOP:.1}" x2="{LEFT:.1}" y2="{:.1}" stroke="black"/>"#,
        TOP + PLOT_HEIGHT
    );
    let base = y_of(if y0 <= 0.0 && y1 >= 0.0 { 0.0 } else { y0 });
    let _ = writeln!(
        s,
        r#"<line x1="{LEFT:.1}" y1="{base:.2}" x2="{:.1}" y2="{base:.2}" stroke="black"/>"#,
        LEFT + plot_w
    );

    // category labels
    let rotate = c.categories.len() > 6;
    for (k, cat) in c.categories.iter().enumerate() {
        let x = x_mid(k);
        let y = TOP + PLOT_HEIGHT + 16.0;
        if rotate {
            let _ = writeln!(
                s,
                r#"<text transform="translate({x:.2} {y:.1}) rotate(-60)" text-anchor="end" font-size="10">{}</text>"#,
                escape(cat)
            );
        } else {
            let _ = writeln!(s, r#"<text x="{x:.2}" y="{y:.1}" text-anchor="middle">{}</text>"#, escape(cat));
        }
    }

    for (i, ser) in c.series.iter().enumerate() {
        let colour = if ser.dashed { "#555555" } else { PALETTE[i % PALETTE.len()] };
        let label = escape(&ser.name);
        match c.style {
            Style::Bars => {
                let w = (band - 16.0) / bars as f64;
                for (k, p) in ser.points.iter().enumerate() {
                    let Some(p) = p else { continue };
                    let x = LEFT + band * k as f64 + 8.0 + w * i as f64;
                    let (top, bottom) = (y_of(p.value.max(0.0)), y_of(p.value.min(0.0)));
                    let _ = writeln!(
                        s,
                        r#"<rect x="{x:.2}" y="{top:.2}" width="{w:.2}" height="{:.2}" fill="{colour}" data-value="{}"><title>{label} {}: {}</title></rect>"#,
                        bottom - top,
                        p.text,
                        escape(&c.categories[k]),
                        p.text
                    );
                }
            }
            Style::Lines | Style::Points => {
                if c.style == Style::Lines || ser.dashed {
                    let path: Vec<String> = ser
                        .points
                        .iter()
                        .enumerate()
                        .filter_map(|(k, p)| p.as_ref().map(|p| format!("{:.2},{:.2}", x_mid(k), y_of(p.value))))
                        .collect();
                    let dash = if ser.dashed { r#" stroke-dasharray="6 4""# } else { "" };
                    let _ = writeln!(
                        s,
                        r#"<polyline points="{}" fill="none" stroke="{colour}" stroke-width="1.5"{dash}/>"#,
                        path.join(" ")
                    );
                }
                if !ser.dashed {
                    for (k, p) in ser.points.iter().enumerate() {
                        let Some(p) = p else { continue };
                        let _ = writeln!(
                            s,
                            r#"<circle cx="{:.2}" cy="{:.2}" r="3" fill="{colour}" data-value="{}"><title>{label} {}: {}</title></circle>"#,
                            x_mid(k),
                            y_of(p.value),
                            p.text,
                            escape(&c.categories[k]),
                            p.text
                        );
                    }
                }
            }
        }
        // legend
        let lx = LEFT + plot_w + 16.0;
        let ly = TOP + 18.0 * i as f64;
        let _ = writeln!(
            s,
            r#"<rect x="{lx:.1}" y="{:.1}" width="12" height="12" fill="{colour}"/><text x="{:.1}" y="{:.1}">{label}</text>"#,
            ly,
            lx + 18.0,
            ly + 10.0
        );
    }
    s.push_str("</svg>\n");
    s
}
