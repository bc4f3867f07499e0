//! CSV trace format.
//!
//! Fixed columns, header mandatory, LF line endings:
//!
//! ```text
//! t_s,pwm_us,command,valve_in,valve_de,pump_on,duty_pct,pressure_kpa,aperture_mm,event
//! ```
//!
//! Booleans are `0`/`1`, `command` is `inflation`/`deflation`/`rest`, floats
//! use the shortest representation that parses back to the same value, and
//! `event` is empty when nothing happened on that tick.

use std::io::{Read, Write};

use softgrip_core::{ControllerMode, TraceRecord};
use thiserror::Error;

pub const HEADER: [&str; 10] = [
    "t_s",
    "pwm_us",
    "command",
    "valve_in",
    "valve_de",
    "pump_on",
    "duty_pct",
    "pressure_kpa",
    "aperture_mm",
    "event",
];

#[derive(Debug, Error)]
pub enum TraceError {
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error("line {line}: {message}")]
    Format { line: u64, message: String },
}

fn flag(b: bool) -> &'static str {
    if b {
        "1"
    } else {
        "0"
    }
}

pub fn write_trace<W: Write>(out: W, trace: &[TraceRecord]) -> Result<(), TraceError> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(out);
    w.write_record(HEADER)?;
    for r in trace {
        w.write_record([
            r.t.to_string().as_str(),
            r.pwm.to_string().as_str(),
            r.command.as_str(),
            flag(r.valve_inflate),
            flag(r.valve_deflate),
            flag(r.pump_on),
            r.duty.to_string().as_str(),
            r.pressure.to_string().as_str(),
            r.aperture.to_string().as_str(),
            r.event.as_deref().unwrap_or(""),
        ])?;
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}

pub fn read_trace<R: Read>(input: R) -> Result<Vec<TraceRecord>, TraceError> {
    let mut rd = csv::ReaderBuilder::new().has_headers(true).from_reader(input);
    let header = rd.headers()?.clone();
    if header.iter().ne(HEADER.iter().copied()) {
        return Err(TraceError::Format {
            line: 1,
            message: format!("unexpected header {:?}", header),
        });
    }
    let mut out = Vec::new();
    for rec in rd.records() {
        let rec = rec?;
        let line = rec.position().map(|p| p.line()).unwrap_or(0);
        let bad = |m: String| TraceError::Format { line, message: m };
        let float = |i: usize| rec[i].parse::<f64>().map_err(|e| bad(format!("{}: {e}", HEADER[i])));
        let boolean = |i: usize| match &rec[i] {
            "0" => Ok(false),
            "1" => Ok(true),
            v => Err(bad(format!("{}: expected 0 or 1, got `{v}`", HEADER[i]))),
        };
        out.push(TraceRecord {
            t: float(0)?,
            pwm: rec[1].parse().map_err(|e| bad(format!("pwm_us: {e}")))?,
            command: ControllerMode::parse(&rec[2]).ok_or_else(|| bad(format!("command: `{}`", &rec[2])))?,
            valve_inflate: boolean(3)?,
            valve_deflate: boolean(4)?,
            pump_on: boolean(5)?,
            duty: float(6)?,
            pressure: float(7)?,
            aperture: float(8)?,
            event: if rec[9].is_empty() {
                None
            } else {
                Some(rec[9].to_string())
            },
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(t: f64, event: Option<&str>) -> TraceRecord {
        TraceRecord {
            t,
            pwm: 1900,
            command: ControllerMode::Inflation,
            valve_inflate: true,
            valve_deflate: false,
            pump_on: true,
            duty: 100.0,
            pressure: -24.123456789012344,
            aperture: 145.0,
            event: event.map(str::to_string),
        }
    }

    #[test]
    fn layout() {
        let mut buf = Vec::new();
        write_trace(
            &mut buf,
            &[row(0.01, None), row(0.02, Some("set_pwm:inflation;ascend"))],
        )
        .unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.split('\n').collect();
        assert_eq!(lines[0], HEADER.join(","));
        assert_eq!(lines[1], "0.01,1900,inflation,1,0,1,100,-24.123456789012344,145,");
        assert!(lines[2].ends_with(",set_pwm:inflation;ascend"));
        assert_eq!(lines[3], "");
        assert!(!text.contains('\r'));
    }

    #[test]
    fn rejects_bad_rows() {
        let bad = format!("{}\n0,1900,sideways,1,0,1,1,1,1,\n", HEADER.join(","));
        assert!(matches!(
            read_trace(bad.as_bytes()),
            Err(TraceError::Format { line: 2, .. })
        ));
        assert!(read_trace("a,b\n".as_bytes()).is_err());
    }
}
