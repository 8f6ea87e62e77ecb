//! CSV readers and writers for the per-subject export layout.
//!
//! ```text
//! <root>/subjects.csv
//! <root>/<subject_id>/{cgm,hr,activity,sleep,stress,exercise}.csv
//! <root>/<subject_id>/eda_sessions.csv + eda/<session_id>.csv
//! <root>/<subject_id>/ecg_sessions.csv + ecg/<session_id>.csv
//! ```

use std::collections::{HashMap, HashSet};
use std::fs;
use std::path::{Path, PathBuf};

use chrono::{DateTime, NaiveDate, SecondsFormat};
use csv::StringRecord;

use super::types::*;
use crate::error::{Error, Result};

pub const MANIFEST_FILE: &str = "subjects.csv";

pub const MANIFEST_HEADER: [&str; 8] = [
    "subject_id",
    "age",
    "sex",
    "height_cm",
    "initial_weight_kg",
    "final_weight_kg",
    "start_date",
    "end_date",
];

pub const SERIES_HEADER: [&str; 2] = ["timestamp", "value"];

pub const ACTIVITY_HEADER: [&str; 17] = [
    "date",
    "calories",
    "steps",
    "distance_km",
    "sedentary_min",
    "lightly_min",
    "moderately_min",
    "very_min",
    "fat_burn_min",
    "cardio_min",
    "peak_min",
    "below_zone1_min",
    "zone1_min",
    "zone2_min",
    "zone3_min",
    "vo2max",
    "resting_hr",
];

pub const SLEEP_HEADER: [&str; 32] = [
    "start",
    "end",
    "asleep_min",
    "awake_min",
    "deep_min",
    "light_min",
    "rem_min",
    "efficiency",
    "awakenings",
    "spo2_avg",
    "spo2_lower",
    "spo2_upper",
    "nightly_temp_delta",
    "br_full_mean",
    "br_full_std",
    "br_full_snr",
    "br_deep_mean",
    "br_deep_std",
    "br_deep_snr",
    "br_light_mean",
    "br_light_std",
    "br_light_snr",
    "br_rem_mean",
    "br_rem_std",
    "br_rem_snr",
    "restlessness",
    "score_overall",
    "score_composition",
    "score_revitalization",
    "score_duration",
    "nightly_rmssd",
    "nonrem_hr",
];

pub const STRESS_HEADER: [&str; 5] = [
    "date",
    "stress_score",
    "sleep_points",
    "responsiveness_points",
    "exertion_points",
];

pub const EXERCISE_HEADER: [&str; 3] = ["start", "duration_min", "avg_hr"];
pub const EDA_SESSIONS_HEADER: [&str; 3] = ["session_id", "start", "hrv_baseline_ms"];
pub const EDA_SAMPLES_HEADER: [&str; 3] = ["t_s", "scl_us", "hr_bpm"];
pub const ECG_SESSIONS_HEADER: [&str; 3] = ["session_id", "start", "session_hr"];
pub const ECG_SAMPLES_HEADER: [&str; 2] = ["t_s", "mv"];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DailyKind {
    Activity,
    Sleep,
    Stress,
}

#[derive(Debug, Clone, PartialEq)]
pub enum DailyRecords {
    Activity(Vec<DailyActivityRecord>),
    Sleep(Vec<SleepEpisode>),
    Stress(Vec<StressDailyRecord>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SessionKind {
    Eda,
    Ecg,
    Exercise,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Sessions {
    Eda(Vec<EdaSession>),
    Ecg(Vec<EcgSession>),
    Exercise(Vec<ExerciseSession>),
}

struct Table {
    file: String,
    columns: HashMap<String, usize>,
    rows: Vec<(u64, StringRecord)>,
}

impl Table {
    fn read(path: &Path) -> Result<Self> {
        let file = path.display().to_string();
        let f = fs::File::open(path).map_err(|e| Error::io(path, e))?;
        let mut reader = csv::ReaderBuilder::new()
            .trim(csv::Trim::All)
            .from_reader(f);
        let columns = reader
            .headers()?
            .iter()
            .enumerate()
            .map(|(i, h)| (h.to_string(), i))
            .collect();
        let mut rows = Vec::new();
        for rec in reader.records() {
            let rec = rec?;
            let line = rec.position().map(|p| p.line()).unwrap_or(0);
            rows.push((line, rec));
        }
        Ok(Self {
            file,
            columns,
            rows,
        })
    }

    fn require(&self, name: &str) -> Result<usize> {
        self.columns.get(name).copied().ok_or_else(|| Error::Schema {
            file: self.file.clone(),
            column: name.to_string(),
        })
    }

    fn optional(&self, name: &str) -> Option<usize> {
        self.columns.get(name).copied()
    }

    fn cells(&self) -> impl Iterator<Item = Row<'_>> {
        self.rows.iter().map(move |(line, rec)| Row {
            file: &self.file,
            line: *line,
            rec,
        })
    }
}

struct Row<'a> {
    file: &'a str,
    line: u64,
    rec: &'a StringRecord,
}

impl Row<'_> {
    fn err(&self, message: impl Into<String>) -> Error {
        Error::Row {
            file: self.file.to_string(),
            line: self.line,
            message: message.into(),
        }
    }

    fn raw(&self, idx: usize) -> &str {
        self.rec.get(idx).unwrap_or("")
    }

    fn text(&self, idx: usize, name: &str) -> Result<String> {
        let s = self.raw(idx);
        if s.is_empty() {
            return Err(self.err(format!("empty `{name}`")));
        }
        Ok(s.to_string())
    }

    fn num(&self, idx: usize, name: &str) -> Result<f64> {
        let s = self.raw(idx);
        s.parse::<f64>()
            .ok()
            .filter(|v| v.is_finite())
            .ok_or_else(|| self.err(format!("`{name}` is not a number: {s:?}")))
    }

    fn opt_num(&self, idx: Option<usize>, name: &str) -> Result<Option<f64>> {
        match idx.map(|i| self.raw(i)) {
            None | Some("") => Ok(None),
            Some(_) => self.num(idx.unwrap(), name).map(Some),
        }
    }

    fn count(&self, idx: usize, name: &str) -> Result<u32> {
        let s = self.raw(idx);
        s.parse::<u32>()
            .map_err(|_| self.err(format!("`{name}` is not a non-negative integer: {s:?}")))
    }

    fn date(&self, idx: usize, name: &str) -> Result<NaiveDate> {
        let s = self.raw(idx);
        NaiveDate::parse_from_str(s, "%Y-%m-%d")
            .map_err(|e| self.err(format!("`{name}` is not an ISO date ({e}): {s:?}")))
    }

    fn timestamp(&self, idx: usize, name: &str) -> Result<Timestamp> {
        let s = self.raw(idx);
        DateTime::parse_from_rfc3339(s)
            .map_err(|e| self.err(format!("`{name}` is not an ISO-8601 timestamp ({e}): {s:?}")))
    }
}

fn fmt_num(v: f64) -> String {
    format!("{v}")
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(fmt_num).unwrap_or_default()
}

pub fn fmt_timestamp(t: &Timestamp) -> String {
    t.to_rfc3339_opts(SecondsFormat::AutoSi, false)
}

fn writer(path: &Path) -> Result<csv::Writer<fs::File>> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
    }
    let file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    Ok(csv::Writer::from_writer(file))
}

fn check_duplicate_dates(file: &str, dates: impl Iterator<Item = NaiveDate>) -> Result<()> {
    let mut seen = HashSet::new();
    for d in dates {
        if !seen.insert(d) {
            return Err(Error::DuplicateDate {
                file: file.to_string(),
                date: d.to_string(),
            });
        }
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// manifest

pub fn parse_subject_manifest(path: impl AsRef<Path>) -> Result<Vec<SubjectMeta>> {
    let table = Table::read(path.as_ref())?;
    let idx: Vec<usize> = MANIFEST_HEADER
        .iter()
        .map(|c| table.require(c))
        .collect::<Result<_>>()?;
    table
        .cells()
        .map(|row| {
            let sex = match row.raw(idx[2]).to_ascii_lowercase().as_str() {
                "female" | "f" => Sex::Female,
                "male" | "m" => Sex::Male,
                other => return Err(row.err(format!("unknown sex {other:?}"))),
            };
            let age = row.count(idx[1], "age")?;
            let meta = SubjectMeta {
                subject_id: row.text(idx[0], "subject_id")?,
                age,
                sex,
                height_cm: row.num(idx[3], "height_cm")?,
                initial_weight_kg: row.num(idx[4], "initial_weight_kg")?,
                final_weight_kg: row.num(idx[5], "final_weight_kg")?,
                intervention_start: row.date(idx[6], "start_date")?,
                intervention_end: row.date(idx[7], "end_date")?,
            };
            meta.validate().map_err(|e| row.err(e.to_string()))?;
            Ok(meta)
        })
        .collect()
}

pub fn write_subject_manifest(path: impl AsRef<Path>, metas: &[SubjectMeta]) -> Result<()> {
    let mut w = writer(path.as_ref())?;
    w.write_record(MANIFEST_HEADER)?;
    for m in metas {
        w.write_record([
            m.subject_id.clone(),
            m.age.to_string(),
            m.sex.as_str().to_string(),
            fmt_num(m.height_cm),
            fmt_num(m.initial_weight_kg),
            fmt_num(m.final_weight_kg),
            m.intervention_start.to_string(),
            m.intervention_end.to_string(),
        ])?;
    }
    w.flush().map_err(|e| Error::io(path.as_ref(), e))
}

// ---------------------------------------------------------------------------
// time series

pub fn parse_timeseries_csv(path: impl AsRef<Path>, kind: SeriesKind) -> Result<TimeSeries> {
    let table = Table::read(path.as_ref())?;
    let t = table.require("timestamp")?;
    let v = table.require("value")?;
    let (lo, hi) = kind.bounds();
    let samples = table
        .cells()
        .map(|row| {
            let at = row.timestamp(t, "timestamp")?;
            let value = row.num(v, "value")?;
            if !kind.accepts(value) {
                return Err(row.err(format!("value {value} outside ({lo}, {hi})")));
            }
            Ok(Sample { at, value })
        })
        .collect::<Result<_>>()?;
    Ok(TimeSeries { kind, samples })
}

pub fn write_timeseries_csv(path: impl AsRef<Path>, series: &TimeSeries) -> Result<()> {
    let mut w = writer(path.as_ref())?;
    w.write_record(SERIES_HEADER)?;
    for s in &series.samples {
        w.write_record([fmt_timestamp(&s.at), fmt_num(s.value)])?;
    }
    w.flush().map_err(|e| Error::io(path.as_ref(), e))
}

// ---------------------------------------------------------------------------
// daily records

pub fn parse_daily_csv(path: impl AsRef<Path>, kind: DailyKind) -> Result<DailyRecords> {
    let path = path.as_ref();
    Ok(match kind {
        DailyKind::Activity => DailyRecords::Activity(parse_activity_csv(path)?),
        DailyKind::Sleep => DailyRecords::Sleep(parse_sleep_csv(path)?),
        DailyKind::Stress => DailyRecords::Stress(parse_stress_csv(path)?),
    })
}

pub fn parse_activity_csv(path: impl AsRef<Path>) -> Result<Vec<DailyActivityRecord>> {
    let table = Table::read(path.as_ref())?;
    let req: Vec<usize> = ACTIVITY_HEADER[..15]
        .iter()
        .map(|c| table.require(c))
        .collect::<Result<_>>()?;
    let vo2 = table.optional("vo2max");
    let rhr = table.optional("resting_hr");
    let records: Vec<DailyActivityRecord> = table
        .cells()
        .map(|row| {
            let n = |k: usize| row.num(req[k], ACTIVITY_HEADER[k]);
            Ok(DailyActivityRecord {
                date: row.date(req[0], "date")?,
                calories: n(1)?,
                steps: n(2)?,
                distance_km: n(3)?,
                sedentary_min: n(4)?,
                lightly_min: n(5)?,
                moderately_min: n(6)?,
                very_min: n(7)?,
                fat_burn_min: n(8)?,
                cardio_min: n(9)?,
                peak_min: n(10)?,
                below_zone1_min: n(11)?,
                zone1_min: n(12)?,
                zone2_min: n(13)?,
                zone3_min: n(14)?,
                vo2max: row.opt_num(vo2, "vo2max")?,
                resting_hr: row.opt_num(rhr, "resting_hr")?,
            })
        })
        .collect::<Result<_>>()?;
    check_duplicate_dates(&table.file, records.iter().map(|r| r.date))?;
    Ok(records)
}

pub fn write_activity_csv(path: impl AsRef<Path>, records: &[DailyActivityRecord]) -> Result<()> {
    let mut w = writer(path.as_ref())?;
    w.write_record(ACTIVITY_HEADER)?;
    for r in records {
        let mut rec = vec![r.date.to_string()];
        rec.extend(
            [r.calories, r.steps, r.distance_km]
                .into_iter()
                .chain(r.minute_fields().map(|(_, v)| v))
                .map(fmt_num),
        );
        rec.push(fmt_opt(r.vo2max));
        rec.push(fmt_opt(r.resting_hr));
        w.write_record(&rec)?;
    }
    w.flush().map_err(|e| Error::io(path.as_ref(), e))
}

pub fn parse_sleep_csv(path: impl AsRef<Path>) -> Result<Vec<SleepEpisode>> {
    let table = Table::read(path.as_ref())?;
    let req: Vec<usize> = SLEEP_HEADER[..9]
        .iter()
        .map(|c| table.require(c))
        .collect::<Result<_>>()?;
    let opt: HashMap<&str, Option<usize>> = SLEEP_HEADER[9..]
        .iter()
        .map(|c| (*c, table.optional(c)))
        .collect();
    table
        .cells()
        .map(|row| {
            let o = |name: &str| row.opt_num(opt[name], name);
            let mut breathing = StageBreathing::default();
            for stage in SleepStage::ALL {
                let s = stage.as_str();
                *breathing.stage_mut(stage) = BreathingRate {
                    mean: o(&format!("br_{s}_mean"))?,
                    std: o(&format!("br_{s}_std"))?,
                    snr: o(&format!("br_{s}_snr"))?,
                };
            }
            Ok(SleepEpisode {
                start: row.timestamp(req[0], "start")?,
                end: row.timestamp(req[1], "end")?,
                asleep_min: row.num(req[2], "asleep_min")?,
                awake_min: row.num(req[3], "awake_min")?,
                deep_min: row.num(req[4], "deep_min")?,
                light_min: row.num(req[5], "light_min")?,
                rem_min: row.num(req[6], "rem_min")?,
                efficiency: row.num(req[7], "efficiency")?,
                awakenings: row.count(req[8], "awakenings")?,
                spo2_avg: o("spo2_avg")?,
                spo2_lower: o("spo2_lower")?,
                spo2_upper: o("spo2_upper")?,
                nightly_temp_delta: o("nightly_temp_delta")?,
                breathing,
                restlessness: o("restlessness")?,
                scores: SleepScores {
                    overall: o("score_overall")?,
                    composition: o("score_composition")?,
                    revitalization: o("score_revitalization")?,
                    duration: o("score_duration")?,
                },
                nightly_rmssd: o("nightly_rmssd")?,
                nonrem_hr: o("nonrem_hr")?,
            })
        })
        .collect()
}

pub fn write_sleep_csv(path: impl AsRef<Path>, episodes: &[SleepEpisode]) -> Result<()> {
    let mut w = writer(path.as_ref())?;
    w.write_record(SLEEP_HEADER)?;
    for e in episodes {
        let mut rec = vec![fmt_timestamp(&e.start), fmt_timestamp(&e.end)];
        rec.extend(
            [e.asleep_min, e.awake_min, e.deep_min, e.light_min, e.rem_min, e.efficiency]
                .map(fmt_num),
        );
        rec.push(e.awakenings.to_string());
        rec.extend(
            [e.spo2_avg, e.spo2_lower, e.spo2_upper, e.nightly_temp_delta].map(fmt_opt),
        );
        for stage in SleepStage::ALL {
            let b = e.breathing.stage(stage);
            rec.extend([b.mean, b.std, b.snr].map(fmt_opt));
        }
        rec.push(fmt_opt(e.restlessness));
        let s = &e.scores;
        rec.extend([s.overall, s.composition, s.revitalization, s.duration].map(fmt_opt));
        rec.push(fmt_opt(e.nightly_rmssd));
        rec.push(fmt_opt(e.nonrem_hr));
        w.write_record(&rec)?;
    }
    w.flush().map_err(|e| Error::io(path.as_ref(), e))
}

pub fn parse_stress_csv(path: impl AsRef<Path>) -> Result<Vec<StressDailyRecord>> {
    let table = Table::read(path.as_ref())?;
    let idx: Vec<usize> = STRESS_HEADER
        .iter()
        .map(|c| table.require(c))
        .collect::<Result<_>>()?;
    let records: Vec<StressDailyRecord> = table
        .cells()
        .map(|row| {
            Ok(StressDailyRecord {
                date: row.date(idx[0], "date")?,
                stress_score: row.num(idx[1], STRESS_HEADER[1])?,
                sleep_points: row.num(idx[2], STRESS_HEADER[2])?,
                responsiveness_points: row.num(idx[3], STRESS_HEADER[3])?,
                exertion_points: row.num(idx[4], STRESS_HEADER[4])?,
            })
        })
        .collect::<Result<_>>()?;
    check_duplicate_dates(&table.file, records.iter().map(|r| r.date))?;
    Ok(records)
}

pub fn write_stress_csv(path: impl AsRef<Path>, records: &[StressDailyRecord]) -> Result<()> {
    let mut w = writer(path.as_ref())?;
    w.write_record(STRESS_HEADER)?;
    for r in records {
        let mut rec = vec![r.date.to_string()];
        rec.extend(
            [
                r.stress_score,
                r.sleep_points,
                r.responsiveness_points,
                r.exertion_points,
            ]
            .map(fmt_num),
        );
        w.write_record(&rec)?;
    }
    w.flush().map_err(|e| Error::io(path.as_ref(), e))
}

// ---------------------------------------------------------------------------
// sessions

/// Parses a session index. For EDA and ECG the companion sample files are
/// read from `eda/` or `ecg/` next to the index file.
pub fn parse_session_csv(path: impl AsRef<Path>, kind: SessionKind) -> Result<Sessions> {
    let path = path.as_ref();
    Ok(match kind {
        SessionKind::Exercise => Sessions::Exercise(parse_exercise_csv(path)?),
        SessionKind::Eda => Sessions::Eda(parse_eda_sessions(path)?),
        SessionKind::Ecg => Sessions::Ecg(parse_ecg_sessions(path)?),
    })
}

pub fn parse_exercise_csv(path: impl AsRef<Path>) -> Result<Vec<ExerciseSession>> {
    let table = Table::read(path.as_ref())?;
    let start = table.require("start")?;
    let dur = table.require("duration_min")?;
    let hr = table.optional("avg_hr");
    table
        .cells()
        .map(|row| {
            let duration_min = row.num(dur, "duration_min")?;
            if duration_min <= 0.0 {
                return Err(row.err(format!("exercise duration {duration_min} must be > 0")));
            }
            let avg_hr = row.opt_num(hr, "avg_hr")?;
            if let Some(h) = avg_hr {
                if !SeriesKind::Hr.accepts(h) {
                    return Err(row.err(format!("exercise avg_hr {h} out of bounds")));
                }
            }
            Ok(ExerciseSession {
                start: row.timestamp(start, "start")?,
                duration_min,
                avg_hr,
            })
        })
        .collect()
}

pub fn write_exercise_csv(path: impl AsRef<Path>, sessions: &[ExerciseSession]) -> Result<()> {
    let mut w = writer(path.as_ref())?;
    w.write_record(EXERCISE_HEADER)?;
    for s in sessions {
        w.write_record([
            fmt_timestamp(&s.start),
            fmt_num(s.duration_min),
            fmt_opt(s.avg_hr),
        ])?;
    }
    w.flush().map_err(|e| Error::io(path.as_ref(), e))
}

fn sample_path(index: &Path, dir: &str, session_id: &str) -> PathBuf {
    index
        .parent()
        .unwrap_or_else(|| Path::new("."))
        .join(dir)
        .join(format!("{session_id}.csv"))
}

fn read_samples(index: &Path, dir: &str, session_id: &str) -> Result<Table> {
    let p = sample_path(index, dir, session_id);
    if !p.is_file() {
        return Err(Error::Session {
            session_id: session_id.to_string(),
            message: format!("sample file {} not found", p.display()),
        });
    }
    Table::read(&p)
}

pub fn parse_eda_sessions(path: impl AsRef<Path>) -> Result<Vec<EdaSession>> {
    let path = path.as_ref();
    let table = Table::read(path)?;
    let id = table.require("session_id")?;
    let start = table.require("start")?;
    let hrv = table.optional("hrv_baseline_ms");
    table
        .cells()
        .map(|row| {
            let session_id = row.text(id, "session_id")?;
            let samples_table = read_samples(path, "eda", &session_id)?;
            let t = samples_table.require("t_s")?;
            let scl = samples_table.require("scl_us")?;
            let hr = samples_table.optional("hr_bpm");
            let samples = samples_table
                .cells()
                .map(|r| {
                    Ok(EdaSample {
                        t_s: r.num(t, "t_s")?,
                        scl_us: r.num(scl, "scl_us")?,
                        hr_bpm: r.opt_num(hr, "hr_bpm")?,
                    })
                })
                .collect::<Result<_>>()?;
            let session = EdaSession {
                session_id,
                start: row.timestamp(start, "start")?,
                hrv_baseline_ms: row.opt_num(hrv, "hrv_baseline_ms")?,
                samples,
            };
            session.validate()?;
            Ok(session)
        })
        .collect()
}

pub fn write_eda_sessions(path: impl AsRef<Path>, sessions: &[EdaSession]) -> Result<()> {
    let path = path.as_ref();
    let mut w = writer(path)?;
    w.write_record(EDA_SESSIONS_HEADER)?;
    for s in sessions {
        w.write_record([
            s.session_id.clone(),
            fmt_timestamp(&s.start),
            fmt_opt(s.hrv_baseline_ms),
        ])?;
        let sp = sample_path(path, "eda", &s.session_id);
        let mut sw = writer(&sp)?;
        sw.write_record(EDA_SAMPLES_HEADER)?;
        for x in &s.samples {
            sw.write_record([fmt_num(x.t_s), fmt_num(x.scl_us), fmt_opt(x.hr_bpm)])?;
        }
        sw.flush().map_err(|e| Error::io(&sp, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn parse_ecg_sessions(path: impl AsRef<Path>) -> Result<Vec<EcgSession>> {
    let path = path.as_ref();
    let table = Table::read(path)?;
    let id = table.require("session_id")?;
    let start = table.require("start")?;
    let hr = table.require("session_hr")?;
    table
        .cells()
        .map(|row| {
            let session_id = row.text(id, "session_id")?;
            let samples_table = read_samples(path, "ecg", &session_id)?;
            let t = samples_table.require("t_s")?;
            let mv = samples_table.require("mv")?;
            let waveform = samples_table
                .cells()
                .map(|r| {
                    Ok(EcgSample {
                        t_s: r.num(t, "t_s")?,
                        mv: r.num(mv, "mv")?,
                    })
                })
                .collect::<Result<_>>()?;
            let session_hr = row.num(hr, "session_hr")?;
            if !SeriesKind::Hr.accepts(session_hr) {
                return Err(row.err(format!("session_hr {session_hr} out of bounds")));
            }
            let session = EcgSession {
                session_id,
                start: row.timestamp(start, "start")?,
                session_hr,
                waveform,
            };
            session.validate()?;
            Ok(session)
        })
        .collect()
}

pub fn write_ecg_sessions(path: impl AsRef<Path>, sessions: &[EcgSession]) -> Result<()> {
    let path = path.as_ref();
    let mut w = writer(path)?;
    w.write_record(ECG_SESSIONS_HEADER)?;
    for s in sessions {
        w.write_record([
            s.session_id.clone(),
            fmt_timestamp(&s.start),
            fmt_num(s.session_hr),
        ])?;
        let sp = sample_path(path, "ecg", &s.session_id);
        let mut sw = writer(&sp)?;
        sw.write_record(ECG_SAMPLES_HEADER)?;
        for x in &s.waveform {
            sw.write_record([fmt_num(x.t_s), fmt_num(x.mv)])?;
        }
        sw.flush().map_err(|e| Error::io(&sp, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

// ---------------------------------------------------------------------------
// whole subjects and cohorts

/// Reads one subject directory. Absent stream files yield empty streams.
pub fn read_bundle(subject_dir: impl AsRef<Path>, meta: SubjectMeta) -> Result<SubjectBundle> {
    let dir = subject_dir.as_ref();
    let present = |name: &str| {
        let p = dir.join(name);
        p.is_file().then_some(p)
    };
    let mut bundle = SubjectBundle::empty(meta);
    if let Some(p) = present("cgm.csv") {
        bundle.glucose = parse_timeseries_csv(p, SeriesKind::Cgm)?;
    }
    if let Some(p) = present("hr.csv") {
        bundle.hr = parse_timeseries_csv(p, SeriesKind::Hr)?;
    }
    if let Some(p) = present("activity.csv") {
        bundle.daily = parse_activity_csv(p)?;
    }
    if let Some(p) = present("sleep.csv") {
        bundle.sleeps = parse_sleep_csv(p)?;
    }
    if let Some(p) = present("stress.csv") {
        bundle.stress = parse_stress_csv(p)?;
    }
    if let Some(p) = present("exercise.csv") {
        bundle.exercises = parse_exercise_csv(p)?;
    }
    if let Some(p) = present("eda_sessions.csv") {
        bundle.eda = parse_eda_sessions(p)?;
    }
    if let Some(p) = present("ecg_sessions.csv") {
        bundle.ecg = parse_ecg_sessions(p)?;
    }
    Ok(bundle)
}

pub fn write_bundle(subject_dir: impl AsRef<Path>, bundle: &SubjectBundle) -> Result<()> {
    let dir = subject_dir.as_ref();
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    write_timeseries_csv(dir.join("cgm.csv"), &bundle.glucose)?;
    write_timeseries_csv(dir.join("hr.csv"), &bundle.hr)?;
    write_activity_csv(dir.join("activity.csv"), &bundle.daily)?;
    write_sleep_csv(dir.join("sleep.csv"), &bundle.sleeps)?;
    write_stress_csv(dir.join("stress.csv"), &bundle.stress)?;
    write_exercise_csv(dir.join("exercise.csv"), &bundle.exercises)?;
    write_eda_sessions(dir.join("eda_sessions.csv"), &bundle.eda)?;
    write_ecg_sessions(dir.join("ecg_sessions.csv"), &bundle.ecg)?;
    Ok(())
}

/// Loads every subject listed in `<root>/subjects.csv`, in manifest order.
pub fn load_cohort(root: impl AsRef<Path>) -> Result<Vec<SubjectBundle>> {
    let root = root.as_ref();
    let metas = parse_subject_manifest(root.join(MANIFEST_FILE))?;
    metas
        .into_iter()
        .map(|m| {
            let dir = root.join(&m.subject_id);
            read_bundle(dir, m)
        })
        .collect()
}

pub fn write_cohort(root: impl AsRef<Path>, bundles: &[SubjectBundle]) -> Result<()> {
    let root = root.as_ref();
    fs::create_dir_all(root).map_err(|e| Error::io(root, e))?;
    let metas: Vec<SubjectMeta> = bundles.iter().map(|b| b.meta.clone()).collect();
    write_subject_manifest(root.join(MANIFEST_FILE), &metas)?;
    for b in bundles {
        write_bundle(root.join(&b.meta.subject_id), b)?;
    }
    Ok(())
}
