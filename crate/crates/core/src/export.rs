//! Deterministic table and snapshot writers.
//!
//! Every floating-point field is printed as `{:.16e}`, i.e. 17 significant
//! digits, which round-trips f64 exactly and keeps output byte-identical
//! across runs and platforms. JSON is assembled by hand for the same
//! reason: serializer defaults would re-shorten the floats.

use std::io::Write;

use num_complex::Complex64;

use crate::algebra::{GradedAmplitude, WalkParams};
use crate::error::{Error, Result};
use crate::free::PropagatorRow;
use crate::hybrid::BoundStateRecord;
use crate::interaction::OrderKRow;
use crate::lemmas::LemmaReport;
use crate::mass_classes::{DiagramClass, OperatorTerm};
use crate::sector::{Mode, SectorState};

/// Fixed-width scientific form with 17 significant digits.
pub fn format_f64(x: f64) -> String {
    format!("{x:.16e}")
}

fn json_escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\t' => out.push_str("\\t"),
            '\r' => out.push_str("\\r"),
            c if (c as u32) < 0x20 => out.push_str(&format!("\\u{:04x}", c as u32)),
            c => out.push(c),
        }
    }
    out
}

/// Propagator table with columns `t,x_in,b0,x_out,bT,re,im`.
pub fn write_propagator_csv<W: Write>(w: W, rows: &[PropagatorRow]) -> Result<()> {
    let mut csv = csv::Writer::from_writer(w);
    csv.write_record(["t", "x_in", "b0", "x_out", "bT", "re", "im"])
        .map_err(csv_err)?;
    for r in rows {
        csv.write_record([
            r.t.to_string(),
            r.x_in.to_string(),
            r.b_in.to_string(),
            r.x_out.to_string(),
            r.b_out.to_string(),
            format_f64(r.amplitude.re),
            format_f64(r.amplitude.im),
        ])
        .map_err(csv_err)?;
    }
    csv.flush()?;
    Ok(())
}

/// Bound-state table with columns `p,omega,loc_length,residual`.
pub fn write_bound_csv<W: Write>(w: W, records: &[BoundStateRecord]) -> Result<()> {
    let mut csv = csv::Writer::from_writer(w);
    csv.write_record(["p", "omega", "loc_length", "residual"])
        .map_err(csv_err)?;
    for r in records {
        csv.write_record([
            format_f64(r.p),
            format_f64(r.omega),
            format_f64(r.loc_length),
            format_f64(r.residual),
        ])
        .map_err(csv_err)?;
    }
    csv.flush()?;
    Ok(())
}

fn csv_err(e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::Io(io),
        other => Error::InvalidParameter(format!("csv: {other:?}")),
    }
}

fn modes_json(modes: &[Mode]) -> String {
    let parts: Vec<String> = modes
        .iter()
        .map(|m| format!("[{},\"{}\"]", m.site, m.chirality))
        .collect();
    format!("[{}]", parts.join(","))
}

fn params_json(params: &WalkParams) -> String {
    format!(
        "{{\"mass\":{},\"chi\":{}}}",
        format_f64(params.m()),
        format_f64(params.chi())
    )
}

/// Snapshot of a complex sector state after `t` steps.
pub fn write_state_json<W: Write>(
    mut w: W,
    state: &SectorState<Complex64>,
    params: &WalkParams,
    t: u64,
) -> Result<()> {
    writeln!(w, "{{")?;
    writeln!(w, "  \"params\": {},", params_json(params))?;
    writeln!(w, "  \"N\": {},", state.n_particles())?;
    writeln!(w, "  \"T\": {t},")?;
    writeln!(w, "  \"amplitudes\": [")?;
    let entries: Vec<String> = state
        .support()
        .map(|(modes, amp)| {
            format!(
                "    {{\"modes\":{},\"re\":{},\"im\":{}}}",
                modes_json(modes),
                format_f64(amp.re),
                format_f64(amp.im)
            )
        })
        .collect();
    writeln!(w, "{}", entries.join(",\n"))?;
    writeln!(w, "  ]")?;
    writeln!(w, "}}")?;
    Ok(())
}

/// Snapshot of a graded sector state: integer terms instead of complex
/// values.
pub fn write_state_json_graded<W: Write>(
    mut w: W,
    state: &SectorState<GradedAmplitude>,
    params: &WalkParams,
    t: u64,
) -> Result<()> {
    writeln!(w, "{{")?;
    writeln!(w, "  \"params\": {},", params_json(params))?;
    writeln!(w, "  \"N\": {},", state.n_particles())?;
    writeln!(w, "  \"T\": {t},")?;
    writeln!(w, "  \"amplitudes\": [")?;
    let entries: Vec<String> = state
        .support()
        .map(|(modes, amp)| {
            let terms: Vec<String> = amp
                .terms()
                .map(|(f, j, c)| format!("{{\"f\":{f},\"j\":{j},\"coeff\":{c}}}"))
                .collect();
            format!(
                "    {{\"modes\":{},\"letters\":{},\"terms\":[{}]}}",
                modes_json(modes),
                amp.letters(),
                terms.join(",")
            )
        })
        .collect();
    writeln!(w, "{}", entries.join(",\n"))?;
    writeln!(w, "  ]")?;
    writeln!(w, "}}")?;
    Ok(())
}

/// Escaped JSON string literal, exposed for report assembly.
pub fn json_string(s: &str) -> String {
    format!("\"{}\"", json_escape(s))
}

/// Interaction-order table with columns
/// `t,k,x_in,a1,y_in,a2,x_out,b1,y_out,b2,re,im`.
pub fn write_order_k_csv<W: Write>(w: W, rows: &[OrderKRow]) -> Result<()> {
    let mut csv = csv::Writer::from_writer(w);
    csv.write_record([
        "t", "k", "x_in", "a1", "y_in", "a2", "x_out", "b1", "y_out", "b2", "re", "im",
    ])
    .map_err(csv_err)?;
    for r in rows {
        csv.write_record([
            r.t.to_string(),
            r.k.to_string(),
            r.boundary.x_in.to_string(),
            r.boundary.a1.to_string(),
            r.boundary.y_in.to_string(),
            r.boundary.a2.to_string(),
            r.boundary.x_out.to_string(),
            r.boundary.b1.to_string(),
            r.boundary.y_out.to_string(),
            r.boundary.b2.to_string(),
            format_f64(r.amplitude.re),
            format_f64(r.amplitude.im),
        ])
        .map_err(csv_err)?;
    }
    csv.flush()?;
    Ok(())
}

/// Check reports as a JSON list; each entry carries its universe
/// description so a pass is re-runnable from the file alone.
pub fn write_lemma_reports_json<W: Write>(mut w: W, reports: &[LemmaReport]) -> Result<()> {
    writeln!(w, "[")?;
    let entries: Vec<String> = reports
        .iter()
        .map(|r| {
            let violations: Vec<String> =
                r.violations.iter().map(|v| json_string(v)).collect();
            format!(
                "  {{\"lemma_id\":{},\"universe_size\":{},\"violations\":[{}],\
                 \"t_max\":{},\"lattice\":[{},{}],\"universe\":{}}}",
                json_string(r.lemma_id),
                r.universe_size,
                violations.join(","),
                r.t_max,
                r.lattice.0,
                r.lattice.1,
                json_string(&r.universe)
            )
        })
        .collect();
    writeln!(w, "{}", entries.join(",\n"))?;
    writeln!(w, "]")?;
    Ok(())
}

/// Diagram-class report for one pair boundary at one total flip order.
///
/// Term labels are matrix-unit names `W<final bit><initial bit>`, one
/// per walker in input order, so `["W00","W11"]` means the first
/// walker enters and leaves right-moving while the second enters and
/// leaves left-moving.
pub fn write_class_report_json<W: Write>(
    mut w: W,
    boundary: (i64, i64, i64, i64),
    t: u64,
    order_f: u64,
    classes: &[(DiagramClass, Vec<OperatorTerm>)],
) -> Result<()> {
    let (x_in, y_in, x_out, y_out) = boundary;
    writeln!(w, "{{")?;
    writeln!(
        w,
        "  \"boundaries\": {{\"x_in\":{x_in},\"y_in\":{y_in},\"x_out\":{x_out},\
         \"y_out\":{y_out},\"t\":{t}}},"
    )?;
    writeln!(w, "  \"order_f\": {order_f},")?;
    writeln!(w, "  \"classes\": [")?;
    let entries: Vec<String> = classes
        .iter()
        .map(|(class, terms)| {
            let term_entries: Vec<String> = terms
                .iter()
                .map(|term| {
                    format!(
                        "{{\"labels\":[{},{}],\"j\":{},\"integer_coeff\":{}}}",
                        json_string(&term.labels.0.name()),
                        json_string(&term.labels.1.name()),
                        term.j,
                        term.integer_coeff
                    )
                })
                .collect();
            format!(
                "    {{\"f1\":{},\"f2\":{},\"terms\":[{}]}}",
                class.f1,
                class.f2,
                term_entries.join(",")
            )
        })
        .collect();
    writeln!(w, "{}", entries.join(",\n"))?;
    writeln!(w, "  ]")?;
    writeln!(w, "}}")?;
    Ok(())
}
