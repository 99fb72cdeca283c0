//! Hand-rolled SVG plotting: a step plot for switched waveforms and a stem
//! plot for spectra. Diagnostic quality, zero dependencies, deterministic
//! output bytes.

use pwm_forge_core::spectrum::Spectrum;
use pwm_forge_core::synthesis::SwitchedWaveform;

const W: f64 = 900.0;
const H: f64 = 420.0;
const ML: f64 = 70.0;
const MR: f64 = 20.0;
const MT: f64 = 36.0;
const MB: f64 = 48.0;

struct Frame {
    x0: f64,
    x1: f64,
    y0: f64,
    y1: f64,
}

impl Frame {
    fn px(&self, x: f64) -> f64 {
        ML + (x - self.x0) / (self.x1 - self.x0) * (W - ML - MR)
    }
    fn py(&self, y: f64) -> f64 {
        MT + (self.y1 - y) / (self.y1 - self.y0) * (H - MT - MB)
    }
}

fn header(title: &str) -> String {
    format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 {W} {H}\" \
         font-family=\"monospace\" font-size=\"12\">\n\
         <rect width=\"{W}\" height=\"{H}\" fill=\"white\"/>\n\
         <text x=\"{}\" y=\"20\" text-anchor=\"middle\">{title}</text>\n",
        W / 2.0
    )
}

fn axes(f: &Frame, x_label: &str, y_label: &str, out: &mut String) {
    out.push_str(&format!(
        "<rect x=\"{ML}\" y=\"{MT}\" width=\"{:.1}\" height=\"{:.1}\" \
         fill=\"none\" stroke=\"black\" stroke-width=\"1\"/>\n",
        W - ML - MR,
        H - MT - MB
    ));
    for i in 0..=5 {
        let x = f.x0 + (f.x1 - f.x0) * i as f64 / 5.0;
        let px = f.px(x);
        out.push_str(&format!(
            "<line x1=\"{px:.1}\" y1=\"{:.1}\" x2=\"{px:.1}\" y2=\"{:.1}\" stroke=\"black\"/>\n\
             <text x=\"{px:.1}\" y=\"{:.1}\" text-anchor=\"middle\">{x:.4}</text>\n",
            H - MB,
            H - MB + 5.0,
            H - MB + 20.0
        ));
    }
    for i in 0..=4 {
        let y = f.y0 + (f.y1 - f.y0) * i as f64 / 4.0;
        let py = f.py(y);
        out.push_str(&format!(
            "<line x1=\"{:.1}\" y1=\"{py:.1}\" x2=\"{ML}\" y2=\"{py:.1}\" stroke=\"black\"/>\n\
             <text x=\"{:.1}\" y=\"{:.1}\" text-anchor=\"end\">{y:.1}</text>\n",
            ML - 5.0,
            ML - 8.0,
            py + 4.0
        ));
    }
    out.push_str(&format!(
        "<text x=\"{}\" y=\"{:.1}\" text-anchor=\"middle\">{x_label}</text>\n\
         <text x=\"16\" y=\"{:.1}\" text-anchor=\"middle\" transform=\"rotate(-90 16 {:.1})\">{y_label}</text>\n",
        (ML + W - MR) / 2.0,
        H - 8.0,
        (MT + H - MB) / 2.0,
        (MT + H - MB) / 2.0
    ));
}

/// Step plot of one period of a switched waveform.
pub fn waveform_svg(w: &SwitchedWaveform, title: &str) -> String {
    let span = w
        .levels
        .1
        .abs()
        .max(w.levels.0.abs())
        .max(w.initial_level.abs());
    let f = Frame {
        x0: 0.0,
        x1: w.period,
        y0: -1.15 * span,
        y1: 1.15 * span,
    };
    let mut out = header(title);
    axes(&f, "t / s", "V", &mut out);

    let mut pts = Vec::with_capacity(2 * w.edges.len() + 2);
    let mut level = w.initial_level;
    pts.push((0.0, level));
    for e in &w.edges {
        pts.push((e.time, level));
        pts.push((e.time, e.level));
        level = e.level;
    }
    pts.push((w.period, level));

    let path: Vec<String> = pts
        .iter()
        .map(|&(x, y)| format!("{:.2},{:.2}", f.px(x), f.py(y)))
        .collect();
    out.push_str(&format!(
        "<polyline points=\"{}\" fill=\"none\" stroke=\"#c02020\" stroke-width=\"1.2\"/>\n",
        path.join(" ")
    ));
    out.push_str("</svg>\n");
    out
}

/// Stem plot of the line magnitudes of a spectrum.
pub fn spectrum_svg(sp: &Spectrum, title: &str) -> String {
    let f_max = sp.lines.len() as f64 * sp.f0;
    let m_max = sp
        .lines
        .iter()
        .map(|l| l.magnitude)
        .fold(1e-12, f64::max);
    let f = Frame {
        x0: 0.0,
        x1: f_max,
        y0: 0.0,
        y1: 1.1 * m_max,
    };
    let mut out = header(title);
    axes(&f, "f / Hz", "V", &mut out);
    let base = f.py(0.0);
    for (i, l) in sp.lines.iter().enumerate() {
        if l.magnitude < 1e-9 * m_max {
            continue;
        }
        let px = f.px((i + 1) as f64 * sp.f0);
        out.push_str(&format!(
            "<line x1=\"{px:.2}\" y1=\"{base:.2}\" x2=\"{px:.2}\" y2=\"{:.2}\" \
             stroke=\"#2040c0\" stroke-width=\"1.1\"/>\n",
            f.py(l.magnitude)
        ));
    }
    out.push_str("</svg>\n");
    out
}
