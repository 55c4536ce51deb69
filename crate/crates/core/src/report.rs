// SPDX-License-Identifier: Apache-2.0
//! Marker report files.
//!
//! Each clock cycle every equalizer writes one line per input followed by an
//! end line:
//!
//! ```text
//! TOP:EQ1 0 17
//! TOP:EQ1 1 -1
//! TOP:EQ1 end
//! ```
//!
//! Fields are separated by a single space, lines end with LF, markers are
//! ASCII decimal with `-1` for an uninitialized marker. Lines of different
//! equalizers may interleave; grouping is per `LEQ_ID`.

use std::collections::HashMap;
use std::fmt;
use std::io::{self, BufRead, Write};

use thiserror::Error;

use crate::marker::TimeMarker;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum ReportRecord {
    Marker {
        leq_id: String,
        input: usize,
        marker: TimeMarker,
    },
    End {
        leq_id: String,
    },
}

impl ReportRecord {
    pub fn leq_id(&self) -> &str {
        match self {
            ReportRecord::Marker { leq_id, .. } | ReportRecord::End { leq_id } => leq_id,
        }
    }
}

impl fmt::Display for ReportRecord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ReportRecord::Marker {
                leq_id,
                input,
                marker,
            } => writeln!(f, "{leq_id} {input} {marker}"),
            ReportRecord::End { leq_id } => writeln!(f, "{leq_id} end"),
        }
    }
}

/// Renders one record, newline included.
pub fn write_record(r: &ReportRecord) -> String {
    r.to_string()
}

#[derive(Debug, Error)]
pub enum ReportError {
    #[error("line {line}: {reason}")]
    Parse { line: usize, reason: String },
    #[error("report ends inside a cycle group of `{leq_id}`")]
    TruncatedReport { leq_id: String },
    #[error("line {line}: input {input} of `{leq_id}` reported twice in one cycle")]
    DuplicateInput {
        line: usize,
        leq_id: String,
        input: usize,
    },
    #[error("line {line}: cycle group of `{leq_id}` is missing input {input}")]
    MissingInput {
        line: usize,
        leq_id: String,
        input: usize,
    },
    #[error(transparent)]
    Io(#[from] io::Error),
}

fn parse_err(line: usize, reason: impl Into<String>) -> ReportError {
    ReportError::Parse {
        line,
        reason: reason.into(),
    }
}

fn parse_input_index(s: &str) -> Option<usize> {
    let canonical =
        !s.is_empty() && s.bytes().all(|b| b.is_ascii_digit()) && (s == "0" || !s.starts_with('0'));
    canonical.then(|| s.parse().ok()).flatten()
}

/// Parses one line (without its terminator). `line` is only used for errors.
pub fn parse_record(text: &str, line: usize) -> Result<ReportRecord, ReportError> {
    let fields: Vec<&str> = text.split(' ').collect();
    match fields.as_slice() {
        [id, "end"] if !id.is_empty() => Ok(ReportRecord::End {
            leq_id: (*id).to_owned(),
        }),
        [id, input, marker] if !id.is_empty() => {
            let input = parse_input_index(input)
                .ok_or_else(|| parse_err(line, format!("bad input index `{input}`")))?;
            let marker = marker
                .parse::<TimeMarker>()
                .map_err(|e| parse_err(line, e.to_string()))?;
            Ok(ReportRecord::Marker {
                leq_id: (*id).to_owned(),
                input,
                marker,
            })
        }
        _ => Err(parse_err(line, format!("malformed record `{text}`"))),
    }
}

/// One cycle's worth of markers for one equalizer, in input order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CycleGroup {
    pub leq_id: String,
    pub markers: Vec<TimeMarker>,
}

impl CycleGroup {
    pub fn new(leq_id: impl Into<String>, markers: Vec<TimeMarker>) -> Self {
        Self {
            leq_id: leq_id.into(),
            markers,
        }
    }

    pub fn records(&self) -> impl Iterator<Item = ReportRecord> + '_ {
        self.markers
            .iter()
            .enumerate()
            .map(|(input, &marker)| ReportRecord::Marker {
                leq_id: self.leq_id.clone(),
                input,
                marker,
            })
            .chain(std::iter::once(ReportRecord::End {
                leq_id: self.leq_id.clone(),
            }))
    }
}

/// Destination for report records produced during simulation.
pub trait RecordSink {
    fn record(&mut self, r: ReportRecord) -> io::Result<()>;
}

/// In-memory report.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct MarkerReport {
    pub records: Vec<ReportRecord>,
}

impl MarkerReport {
    pub fn to_text(&self) -> String {
        self.records.iter().map(write_record).collect()
    }

    pub fn groups(&self) -> Result<Vec<CycleGroup>, ReportError> {
        GroupReader::new(
            self.records
                .iter()
                .cloned()
                .enumerate()
                .map(|(i, r)| Ok((i + 1, r))),
        )
        .collect()
    }
}

impl RecordSink for MarkerReport {
    fn record(&mut self, r: ReportRecord) -> io::Result<()> {
        self.records.push(r);
        Ok(())
    }
}

/// Streams records to any writer.
pub struct ReportWriter<W: Write> {
    inner: W,
}

impl<W: Write> ReportWriter<W> {
    pub fn new(inner: W) -> Self {
        Self { inner }
    }

    pub fn into_inner(self) -> W {
        self.inner
    }

    pub fn flush(&mut self) -> io::Result<()> {
        self.inner.flush()
    }
}

impl<W: Write> RecordSink for ReportWriter<W> {
    fn record(&mut self, r: ReportRecord) -> io::Result<()> {
        write!(self.inner, "{r}")
    }
}

/// Line-by-line record reader. Yields `(line_number, record)`.
pub struct RecordReader<R> {
    inner: R,
    line: usize,
    buf: String,
}

impl<R: BufRead> RecordReader<R> {
    pub fn new(inner: R) -> Self {
        Self {
            inner,
            line: 0,
            buf: String::new(),
        }
    }
}

impl<R: BufRead> Iterator for RecordReader<R> {
    type Item = Result<(usize, ReportRecord), ReportError>;

    fn next(&mut self) -> Option<Self::Item> {
        self.buf.clear();
        match self.inner.read_line(&mut self.buf) {
            Ok(0) => None,
            Ok(_) => {
                self.line += 1;
                let text = self.buf.strip_suffix('\n').unwrap_or(&self.buf);
                Some(parse_record(text, self.line).map(|r| (self.line, r)))
            }
            Err(e) => Some(Err(e.into())),
        }
    }
}

/// Groups a record stream into per-equalizer cycle groups, in the order their
/// end lines appear. Memory is bounded by the open groups, one per equalizer.
pub struct GroupReader<I> {
    records: I,
    open: HashMap<String, Vec<Option<TimeMarker>>>,
    last_line: usize,
    done: bool,
}

impl<I> GroupReader<I>
where
    I: Iterator<Item = Result<(usize, ReportRecord), ReportError>>,
{
    pub fn new(records: I) -> Self {
        Self {
            records,
            open: HashMap::new(),
            last_line: 0,
            done: false,
        }
    }

    fn close(&mut self, leq_id: String, line: usize) -> Result<CycleGroup, ReportError> {
        let slots = self.open.remove(&leq_id).unwrap_or_default();
        if slots.is_empty() {
            return Err(ReportError::MissingInput {
                line,
                leq_id,
                input: 0,
            });
        }
        let mut markers = Vec::with_capacity(slots.len());
        for (input, m) in slots.into_iter().enumerate() {
            match m {
                Some(m) => markers.push(m),
                None => {
                    return Err(ReportError::MissingInput {
                        line,
                        leq_id,
                        input,
                    })
                }
            }
        }
        Ok(CycleGroup { leq_id, markers })
    }
}

impl<I> Iterator for GroupReader<I>
where
    I: Iterator<Item = Result<(usize, ReportRecord), ReportError>>,
{
    type Item = Result<CycleGroup, ReportError>;

    fn next(&mut self) -> Option<Self::Item> {
        if self.done {
            return None;
        }
        loop {
            let item = match self.records.next() {
                Some(item) => item,
                None => {
                    self.done = true;
                    // Report the lexicographically first open block so the error is deterministic.
                    let open = self.open.keys().min().cloned();
                    return open.map(|leq_id| Err(ReportError::TruncatedReport { leq_id }));
                }
            };
            let (line, record) = match item {
                Ok(x) => x,
                Err(e) => {
                    self.done = true;
                    return Some(Err(e));
                }
            };
            self.last_line = line;
            match record {
                ReportRecord::Marker {
                    leq_id,
                    input,
                    marker,
                } => {
                    let slots = self.open.entry(leq_id.clone()).or_default();
                    if slots.len() <= input {
                        slots.resize(input + 1, None);
                    }
                    if slots[input].replace(marker).is_some() {
                        self.done = true;
                        return Some(Err(ReportError::DuplicateInput {
                            line,
                            leq_id,
                            input,
                        }));
                    }
                }
                ReportRecord::End { leq_id } => {
                    let group = self.close(leq_id, line);
                    if group.is_err() {
                        self.done = true;
                    }
                    return Some(group);
                }
            }
        }
    }
}

/// Streaming parse of a report into cycle groups.
pub fn parse_report<R: BufRead>(reader: R) -> GroupReader<RecordReader<R>> {
    GroupReader::new(RecordReader::new(reader))
}
