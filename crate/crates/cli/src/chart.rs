//! Roofline charts as hand-written SVG or as sampled CSV.
//!
//! Both encodings are pure functions of their inputs; nothing time- or
//! environment-dependent is emitted unless a stamp is passed in.

use std::fmt::Write as _;

use rooflens_core::roofline::{attainable, ceiling_name, ridge_point, sample_curve, RooflinePoint};
use rooflens_core::{Error, ExecutionUnit, HardwareSpec, Precision};

const WIDTH: f64 = 760.0;
const HEIGHT: f64 = 480.0;
const LEFT: f64 = 80.0;
const RIGHT: f64 = 170.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 56.0;

/// A labelled kernel intensity to place on the chart.
#[derive(Clone, Debug, PartialEq)]
pub struct Marker {
    pub label: String,
    pub intensity: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ChartRequest {
    pub units: Vec<ExecutionUnit>,
    pub precision: Precision,
    pub i_min: Option<f64>,
    pub i_max: Option<f64>,
    pub points: usize,
    pub markers: Vec<Marker>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Ceiling {
    pub name: String,
    pub unit: ExecutionUnit,
    pub peak: f64,
    pub ridge: f64,
    pub samples: Vec<RooflinePoint>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PlacedMarker {
    pub label: String,
    pub intensity: f64,
    /// Attainable performance under the lowest requested ceiling.
    pub attainable: f64,
    pub on_bandwidth_arm: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RooflineChart {
    pub machine: String,
    pub bandwidth: f64,
    pub i_min: f64,
    pub i_max: f64,
    pub ceilings: Vec<Ceiling>,
    pub markers: Vec<PlacedMarker>,
}

fn decade(k: i32) -> f64 {
    format!("1e{k}").parse().expect("decade literal")
}

fn decade_floor(x: f64) -> i32 {
    let mut k = x.log10().floor() as i32;
    while decade(k) > x {
        k -= 1;
    }
    k
}

fn decade_ceil(x: f64) -> i32 {
    let mut k = x.log10().ceil() as i32;
    while decade(k) < x {
        k += 1;
    }
    k
}

pub fn build_chart(spec: &HardwareSpec, req: &ChartRequest) -> Result<RooflineChart, Error> {
    if req.units.is_empty() {
        return Err(Error::InvalidRange("no execution units requested"));
    }
    let mut units = req.units.clone();
    units.sort();
    units.dedup();
    let ridges = units
        .iter()
        .map(|&u| ridge_point(spec, u, req.precision))
        .collect::<Result<Vec<_>, _>>()?;
    for m in &req.markers {
        if !(m.intensity > 0.0 && m.intensity.is_finite()) {
            return Err(Error::ZeroIntensity);
        }
    }

    let lo_candidate = req
        .markers
        .iter()
        .map(|m| m.intensity / 2.0)
        .fold(0.01, f64::min);
    let hi_candidate = req
        .markers
        .iter()
        .map(|m| m.intensity * 2.0)
        .chain(ridges.iter().map(|r| r * 2.0))
        .fold(100.0, f64::max);
    let i_min = req
        .i_min
        .unwrap_or_else(|| decade(decade_floor(lo_candidate)));
    let i_max = req
        .i_max
        .unwrap_or_else(|| decade(decade_ceil(hi_candidate)));

    let mut ceilings = Vec::new();
    for (&unit, &ridge) in units.iter().zip(&ridges) {
        ceilings.push(Ceiling {
            name: ceiling_name(unit, req.precision),
            unit,
            peak: spec.peak(unit, req.precision)?,
            ridge,
            samples: sample_curve(spec, unit, req.precision, i_min, i_max, req.points)?,
        });
    }

    let base = units[0];
    let markers = req
        .markers
        .iter()
        .map(|m| {
            Ok(PlacedMarker {
                label: m.label.clone(),
                intensity: m.intensity,
                attainable: attainable(spec, base, req.precision, m.intensity)?,
                on_bandwidth_arm: m.intensity < ridges[0],
            })
        })
        .collect::<Result<Vec<_>, Error>>()?;

    Ok(RooflineChart {
        machine: spec.name().to_string(),
        bandwidth: spec.memory_bandwidth(),
        i_min,
        i_max,
        ceilings,
        markers,
    })
}

impl RooflineChart {
    /// Checks every sample against its ceiling and the bandwidth arm.
    pub fn check_invariants(&self) -> Result<(), String> {
        for c in &self.ceilings {
            for p in &c.samples {
                if p.attainable > c.peak || p.attainable > self.bandwidth * p.intensity {
                    return Err(format!(
                        "sample at I={} exceeds the {} roofline",
                        p.intensity, c.name
                    ));
                }
            }
        }
        Ok(())
    }

    /// `intensity,attainable,ceiling_name`, one row per sample.
    pub fn to_csv(&self, stamp: Option<&str>) -> String {
        let mut out = String::new();
        if let Some(s) = stamp {
            let _ = writeln!(out, "# {s}");
        }
        out.push_str("intensity,attainable,ceiling_name\n");
        for c in &self.ceilings {
            for p in &c.samples {
                let _ = writeln!(out, "{},{},{}", p.intensity, p.attainable, p.ceiling_name);
            }
        }
        out
    }

    pub fn to_svg(&self, stamp: Option<&str>) -> String {
        let plot_w = WIDTH - LEFT - RIGHT;
        let plot_h = HEIGHT - TOP - BOTTOM;
        let (x_lo, x_hi) = (self.i_min.log10(), self.i_max.log10());
        let top_peak = self.ceilings.iter().map(|c| c.peak).fold(0.0, f64::max);
        let y_lo_k = decade_floor(self.bandwidth * self.i_min);
        let mut y_hi_k = decade_ceil(top_peak);
        if decade(y_hi_k) == top_peak {
            y_hi_k += 1;
        }
        let (y_lo, y_hi) = (f64::from(y_lo_k), f64::from(y_hi_k));
        let px = |i: f64| LEFT + (i.log10() - x_lo) / (x_hi - x_lo) * plot_w;
        let py = |p: f64| TOP + plot_h - (p.log10() - y_lo) / (y_hi - y_lo) * plot_h;

        let mut s = String::new();
        let _ = writeln!(
            s,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
        );
        if let Some(st) = stamp {
            let _ = writeln!(s, "<!-- {} -->", xml_escape(st));
        }
        let _ = writeln!(
            s,
            r#"<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#
        );
        let _ = writeln!(
            s,
            r#"<text x="{:.2}" y="24" text-anchor="middle" font-size="15">Roofline: {}</text>"#,
            LEFT + plot_w / 2.0,
            xml_escape(&self.machine)
        );

        // Decade grid and tick labels.
        for k in decade_ceil(self.i_min)..=decade_floor(self.i_max) {
            let x = px(decade(k));
            let _ = writeln!(
                s,
                r##"<line class="grid" x1="{x:.2}" y1="{TOP:.2}" x2="{x:.2}" y2="{:.2}" stroke="#ddd"/>"##,
                TOP + plot_h
            );
            let _ = writeln!(
                s,
                r#"<text class="tick" x="{x:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
                TOP + plot_h + 16.0,
                decade(k)
            );
        }
        for k in y_lo_k..=y_hi_k {
            let y = py(decade(k));
            let _ = writeln!(
                s,
                r##"<line class="grid" x1="{LEFT:.2}" y1="{y:.2}" x2="{:.2}" y2="{y:.2}" stroke="#ddd"/>"##,
                LEFT + plot_w
            );
            let _ = writeln!(
                s,
                r#"<text class="tick" x="{:.2}" y="{:.2}" text-anchor="end">1e{k}</text>"#,
                LEFT - 6.0,
                y + 4.0
            );
        }
        let _ = writeln!(
            s,
            r#"<rect class="axes" x="{LEFT:.2}" y="{TOP:.2}" width="{plot_w:.2}" height="{plot_h:.2}" fill="none" stroke="black"/>"#
        );
        let _ = writeln!(
            s,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">operational intensity (flop/byte)</text>"#,
            LEFT + plot_w / 2.0,
            HEIGHT - 14.0
        );
        let _ = writeln!(
            s,
            r#"<text x="18" y="{:.2}" text-anchor="middle" transform="rotate(-90 18 {:.2})">attainable performance (flop/s)</text>"#,
            TOP + plot_h / 2.0,
            TOP + plot_h / 2.0
        );

        // One bandwidth arm shared by all ceilings, up to the highest ridge.
        let arm_end = self
            .ceilings
            .iter()
            .map(|c| c.ridge.min(self.i_max))
            .fold(self.i_min, f64::max);
        let _ = writeln!(
            s,
            r##"<line class="bandwidth-arm" data-bandwidth="{}" x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="#333" stroke-width="2"/>"##,
            self.bandwidth,
            px(self.i_min),
            py(self.bandwidth * self.i_min),
            px(arm_end),
            py(self.bandwidth * arm_end)
        );

        let colours = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd"];
        for (idx, c) in self.ceilings.iter().enumerate() {
            let colour = colours[idx % colours.len()];
            let start = c.ridge.clamp(self.i_min, self.i_max);
            let y = py(c.peak);
            let _ = writeln!(
                s,
                r#"<line class="ceiling" data-ceiling="{}" data-peak="{}" data-ridge="{}" x1="{:.2}" y1="{y:.2}" x2="{:.2}" y2="{y:.2}" stroke="{colour}" stroke-width="2"/>"#,
                xml_escape(&c.name),
                c.peak,
                c.ridge,
                px(start),
                px(self.i_max)
            );
            let _ = writeln!(
                s,
                r#"<text class="ceiling-label" x="{:.2}" y="{:.2}" fill="{colour}">{}</text>"#,
                px(self.i_max) + 6.0,
                y + 4.0,
                xml_escape(&c.name)
            );
        }

        for m in &self.markers {
            let (x, y) = (px(m.intensity), py(m.attainable));
            let region = if m.on_bandwidth_arm {
                "bandwidth"
            } else {
                "ceiling"
            };
            let _ = writeln!(
                s,
                r##"<circle class="marker" data-kernel="{}" data-intensity="{}" data-attainable="{}" data-region="{region}" cx="{x:.2}" cy="{y:.2}" r="4" fill="#ff7f0e"/>"##,
                xml_escape(&m.label),
                m.intensity,
                m.attainable
            );
            let _ = writeln!(
                s,
                r#"<text class="marker-label" x="{:.2}" y="{:.2}">{}</text>"#,
                x + 6.0,
                y + 14.0,
                xml_escape(&m.label)
            );
        }
        s.push_str("</svg>\n");
        s
    }
}

fn xml_escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

#[cfg(test)]
mod tests {
    use super::*;
    use rooflens_core::hardware::builtin;

    fn request(markers: Vec<Marker>) -> ChartRequest {
        ChartRequest {
            units: vec![ExecutionUnit::TensorCore, ExecutionUnit::CudaCore],
            precision: Precision::FP64,
            i_min: None,
            i_max: None,
            points: 16,
            markers,
        }
    }

    fn attr(tag: &str, name: &str) -> f64 {
        let key = format!(" {name}=\"");
        let start = tag.find(&key).unwrap() + key.len();
        let end = start + tag[start..].find('"').unwrap();
        tag[start..end].parse().unwrap()
    }

    #[test]
    fn tensor_ceiling_above_cuda_ceiling() {
        let a = builtin("A100-80GB").unwrap();
        let chart = build_chart(&a, &request(vec![])).unwrap();
        assert_eq!(chart.ceilings.len(), 2);
        assert_eq!((chart.i_min, chart.i_max), (0.01, 100.0));
        chart.check_invariants().unwrap();
        let svg = chart.to_svg(None);
        let lines: Vec<&str> = svg
            .lines()
            .filter(|l| l.contains("class=\"ceiling\""))
            .collect();
        assert_eq!(lines.len(), 2);
        let cc = lines.iter().find(|l| l.contains("FP64 CudaCore")).unwrap();
        let tc = lines
            .iter()
            .find(|l| l.contains("FP64 TensorCore"))
            .unwrap();
        // SVG y grows downwards.
        assert!(attr(tc, "y1") < attr(cc, "y1"));
        assert_eq!(svg.matches("class=\"bandwidth-arm\"").count(), 1);
    }

    #[test]
    fn scale_marker_on_bandwidth_arm() {
        let a = builtin("A100-80GB").unwrap();
        let chart = build_chart(
            &a,
            &request(vec![Marker {
                label: "scale".into(),
                intensity: 1.0 / 16.0,
            }]),
        )
        .unwrap();
        let m = &chart.markers[0];
        assert!(m.on_bandwidth_arm);
        assert_eq!(m.attainable, 1.94e12 / 16.0);
        let svg = chart.to_svg(None);
        assert!(svg.contains("data-region=\"bandwidth\""));
    }

    #[test]
    fn csv_matches_samples_and_is_deterministic() {
        let a = builtin("GH200").unwrap();
        let chart = build_chart(&a, &request(vec![])).unwrap();
        let csv = chart.to_csv(None);
        assert_eq!(csv, build_chart(&a, &request(vec![])).unwrap().to_csv(None));
        let rows: Vec<(f64, f64, String)> = csv
            .lines()
            .skip(1)
            .map(|l| {
                let f: Vec<&str> = l.split(',').collect();
                (
                    f[0].parse().unwrap(),
                    f[1].parse().unwrap(),
                    f[2].to_string(),
                )
            })
            .collect();
        let expected: Vec<(f64, f64, String)> = chart
            .ceilings
            .iter()
            .flat_map(|c| {
                c.samples
                    .iter()
                    .map(|p| (p.intensity, p.attainable, p.ceiling_name.clone()))
            })
            .collect();
        assert_eq!(rows, expected);
    }

    #[test]
    fn range_extends_to_markers() {
        let a = builtin("A100-80GB").unwrap();
        let chart = build_chart(
            &a,
            &request(vec![Marker {
                label: "tiny".into(),
                intensity: 1e-4,
            }]),
        )
        .unwrap();
        assert_eq!(chart.i_min, 1e-5);
        assert!(build_chart(
            &a,
            &request(vec![Marker {
                label: "bad".into(),
                intensity: 0.0
            }])
        )
        .is_err());
    }

    #[test]
    fn stamp_only_when_asked() {
        let a = builtin("A100-80GB").unwrap();
        let chart = build_chart(&a, &request(vec![])).unwrap();
        assert!(!chart.to_svg(None).contains("<!--"));
        assert!(chart
            .to_svg(Some("generated at 1"))
            .contains("<!-- generated at 1 -->"));
        assert!(chart
            .to_csv(Some("generated at 1"))
            .starts_with("# generated at 1\n"));
    }
}
