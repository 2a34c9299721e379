use std::fmt::Write as _;

use super::{IngestError, Result, N_LEADS, N_SAMPLES, SAMPLING_RATE_HZ};

/// Gain applied when a signal line omits it (or gives 0), in adu per mV.
pub const DEFAULT_GAIN: f64 = 200.0;

/// One signal specification line of a WFDB header.
#[derive(Debug, Clone, PartialEq)]
pub struct SignalSpec {
    pub file_name: String,
    pub format_code: u16,
    /// ADC units per physical unit (mV).
    pub gain: f64,
    /// ADC value corresponding to 0 mV.
    pub baseline: i32,
    pub units: Option<String>,
    pub adc_resolution: Option<u32>,
    pub adc_zero: Option<i32>,
    pub initial_value: Option<i32>,
    pub checksum: Option<i32>,
    pub block_size: Option<u32>,
    /// Trailing description; holds the lead name for ECG records.
    pub lead_name: String,
    gain_written: bool,
    baseline_written: bool,
}

impl SignalSpec {
    /// A format-16 signal with every optional field present.
    pub fn format16(file_name: &str, gain: f64, baseline: i32, lead_name: &str) -> Self {
        SignalSpec {
            file_name: file_name.to_string(),
            format_code: 16,
            gain,
            baseline,
            units: Some("mV".to_string()),
            adc_resolution: Some(16),
            adc_zero: Some(0),
            initial_value: Some(0),
            checksum: Some(0),
            block_size: Some(0),
            lead_name: lead_name.to_string(),
            gain_written: true,
            baseline_written: true,
        }
    }
}

/// Parsed WFDB record header.
#[derive(Debug, Clone, PartialEq)]
pub struct RecordHeader {
    pub record_name: String,
    pub n_signals: usize,
    pub sampling_rate_hz: f64,
    pub n_samples: usize,
    pub signals: Vec<SignalSpec>,
}

impl RecordHeader {
    /// Checks the 12-lead, 500 Hz, 5000-sample shape required downstream.
    pub fn ensure_standard(&self) -> Result<()> {
        let fail = |reason: String| {
            Err(IngestError::UnsupportedRecord {
                record: self.record_name.clone(),
                reason,
            })
        };
        if self.n_signals != N_LEADS {
            return fail(format!("{} signals", self.n_signals));
        }
        if self.sampling_rate_hz != SAMPLING_RATE_HZ {
            return fail(format!("sampling rate {} Hz", self.sampling_rate_hz));
        }
        if self.n_samples != N_SAMPLES {
            return fail(format!("{} samples per signal", self.n_samples));
        }
        Ok(())
    }

    /// Serializes back to header text that `parse_header` reads identically.
    pub fn to_header_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "{} {} {} {}",
            self.record_name, self.n_signals, self.sampling_rate_hz, self.n_samples
        );
        for s in &self.signals {
            let mut fields = vec![s.file_name.clone(), s.format_code.to_string()];
            let mut optional = Vec::new();
            if s.gain_written {
                let mut gain = s.gain.to_string();
                if s.baseline_written {
                    let _ = write!(gain, "({})", s.baseline);
                }
                if let Some(units) = &s.units {
                    let _ = write!(gain, "/{units}");
                }
                optional.push(Some(gain));
            } else {
                optional.push(None);
            }
            optional.push(s.adc_resolution.map(|v| v.to_string()));
            optional.push(s.adc_zero.map(|v| v.to_string()));
            optional.push(s.initial_value.map(|v| v.to_string()));
            optional.push(s.checksum.map(|v| v.to_string()));
            optional.push(s.block_size.map(|v| v.to_string()));
            // Positional fields: stop at the first gap.
            fields.extend(optional.into_iter().map_while(|f| f));
            if !s.lead_name.is_empty() && fields.len() == 8 {
                fields.push(s.lead_name.clone());
            }
            out.push_str(&fields.join(" "));
            out.push('\n');
        }
        out
    }
}

fn malformed(line: usize, reason: impl Into<String>) -> IngestError {
    IngestError::MalformedHeader {
        line,
        reason: reason.into(),
    }
}

fn parse_num<T: std::str::FromStr>(tok: &str, line: usize, what: &str) -> Result<T> {
    tok.parse::<T>()
        .map_err(|_| malformed(line, format!("{what} `{tok}` is not a valid number")))
}

/// Parses WFDB header text (record line followed by one line per signal).
///
/// Comment lines (`#`) and blank lines are skipped. Only single-segment
/// records in format 16 are accepted.
pub fn parse_header(header_text: &str) -> Result<RecordHeader> {
    let mut lines = header_text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));

    let (line_no, record_line) = lines
        .next()
        .ok_or_else(|| malformed(0, "no record line"))?;
    let toks: Vec<&str> = record_line.split_whitespace().collect();
    if toks.len() < 4 {
        return Err(malformed(
            line_no,
            format!("record line needs name, signals, rate and samples; got {} fields", toks.len()),
        ));
    }
    let record_name = toks[0];
    if record_name.contains('/') {
        return Err(malformed(line_no, "multi-segment records are not supported"));
    }
    let n_signals: usize = parse_num(toks[1], line_no, "signal count")?;
    // `fs/counter(base)` keeps only the sampling frequency.
    let fs_tok = toks[2].split('/').next().unwrap_or_default();
    let sampling_rate_hz: f64 = parse_num(fs_tok, line_no, "sampling rate")?;
    if !(sampling_rate_hz.is_finite() && sampling_rate_hz > 0.0) {
        return Err(malformed(line_no, "sampling rate must be positive"));
    }
    let n_samples: usize = parse_num(toks[3], line_no, "sample count")?;

    let mut signals = Vec::with_capacity(n_signals.min(64));
    for (line_no, line) in lines.by_ref().take(n_signals) {
        signals.push(parse_signal_line(line, line_no)?);
    }
    if signals.len() != n_signals {
        return Err(malformed(
            line_no,
            format!("declared {n_signals} signals but found {}", signals.len()),
        ));
    }

    Ok(RecordHeader {
        record_name: record_name.to_string(),
        n_signals,
        sampling_rate_hz,
        n_samples,
        signals,
    })
}

fn parse_signal_line(line: &str, line_no: usize) -> Result<SignalSpec> {
    // Up to eight positional fields, then the free-text description.
    let mut rest = line;
    let mut fields = Vec::with_capacity(8);
    while fields.len() < 8 {
        let trimmed = rest.trim_start();
        if trimmed.is_empty() {
            break;
        }
        let end = trimmed.find(char::is_whitespace).unwrap_or(trimmed.len());
        fields.push(&trimmed[..end]);
        rest = &trimmed[end..];
    }
    let description = rest.trim().to_string();
    if fields.len() < 2 {
        return Err(malformed(line_no, "signal line needs file name and format"));
    }

    let format_code = parse_format(fields[1], line_no)?;

    let mut spec = SignalSpec {
        file_name: fields[0].to_string(),
        format_code,
        gain: DEFAULT_GAIN,
        baseline: 0,
        units: None,
        adc_resolution: None,
        adc_zero: None,
        initial_value: None,
        checksum: None,
        block_size: None,
        lead_name: description,
        gain_written: false,
        baseline_written: false,
    };

    if let Some(tok) = fields.get(2) {
        let (gain_part, units) = match tok.split_once('/') {
            Some((g, u)) => (g, Some(u.to_string())),
            None => (*tok, None),
        };
        let (gain_str, baseline) = match gain_part.split_once('(') {
            Some((g, b)) => {
                let b = b
                    .strip_suffix(')')
                    .ok_or_else(|| malformed(line_no, "unterminated baseline"))?;
                (g, Some(parse_num::<i32>(b, line_no, "baseline")?))
            }
            None => (gain_part, None),
        };
        let gain: f64 = parse_num(gain_str, line_no, "gain")?;
        if !gain.is_finite() || gain < 0.0 {
            return Err(malformed(line_no, "gain must be a non-negative number"));
        }
        spec.gain = if gain == 0.0 { DEFAULT_GAIN } else { gain };
        spec.gain_written = true;
        spec.units = units;
        if let Some(b) = baseline {
            spec.baseline = b;
            spec.baseline_written = true;
        }
    }
    if let Some(tok) = fields.get(3) {
        spec.adc_resolution = Some(parse_num(tok, line_no, "ADC resolution")?);
    }
    if let Some(tok) = fields.get(4) {
        let zero = parse_num(tok, line_no, "ADC zero")?;
        spec.adc_zero = Some(zero);
        if !spec.baseline_written {
            spec.baseline = zero;
        }
    }
    if let Some(tok) = fields.get(5) {
        spec.initial_value = Some(parse_num(tok, line_no, "initial value")?);
    }
    if let Some(tok) = fields.get(6) {
        spec.checksum = Some(parse_num(tok, line_no, "checksum")?);
    }
    if let Some(tok) = fields.get(7) {
        spec.block_size = Some(parse_num(tok, line_no, "block size")?);
    }
    Ok(spec)
}

/// Accepts `16`, optionally with trivial `x1`, `:0` and `+0` modifiers.
fn parse_format(tok: &str, line_no: usize) -> Result<u16> {
    let digits: &str = &tok[..tok.find(|c: char| !c.is_ascii_digit()).unwrap_or(tok.len())];
    if digits.is_empty() {
        return Err(malformed(line_no, format!("format `{tok}` is not numeric")));
    }
    let code: u16 = digits
        .parse()
        .map_err(|_| IngestError::UnsupportedFormat(tok.to_string()))?;
    let mut modifiers = &tok[digits.len()..];
    for (prefix, trivial) in [("x", "1"), (":", "0"), ("+", "0")] {
        if let Some(rest) = modifiers.strip_prefix(prefix) {
            let end = rest.find(['x', ':', '+']).unwrap_or(rest.len());
            if &rest[..end] != trivial {
                return Err(IngestError::UnsupportedFormat(tok.to_string()));
            }
            modifiers = &rest[end..];
        }
    }
    if !modifiers.is_empty() {
        return Err(malformed(line_no, format!("format `{tok}` has trailing garbage")));
    }
    if code != 16 {
        return Err(IngestError::UnsupportedFormat(tok.to_string()));
    }
    Ok(code)
}
