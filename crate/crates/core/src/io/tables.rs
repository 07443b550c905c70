use super::check_finite;
use crate::error::{Error, Result};
use crate::imprints::ProximityEvent;
use crate::model::BoundingBox3D;
use crate::simulator::GroundTruthRecord;

const GT_HEADER: [&str; 8] = ["frame", "identity", "cx", "cy", "cz", "ex", "ey", "ez"];
const EVENT_HEADER: [&str; 5] = ["roi", "identity", "enter_s", "exit_s", "min_dist_m"];

fn writer() -> csv::Writer<Vec<u8>> {
    csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new())
}

fn finish(w: csv::Writer<Vec<u8>>) -> String {
    String::from_utf8(w.into_inner().expect("in-memory writer")).expect("utf-8 fields")
}

fn records(text: &str, what: &str, header: &[&str]) -> Result<Vec<csv::StringRecord>> {
    let mut r = csv::ReaderBuilder::new().has_headers(true).from_reader(text.as_bytes());
    let got = r.headers().map_err(|e| Error::parse(what, e))?.clone();
    if got.iter().ne(header.iter().copied()) {
        return Err(Error::Schema(format!("{what}: header must be {}", header.join(","))));
    }
    r.records().map(|rec| rec.map_err(|e| Error::parse(what, e))).collect()
}

fn field<T: std::str::FromStr>(rec: &csv::StringRecord, i: usize, what: &str) -> Result<T> {
    let line = rec.position().map_or(0, |p| p.line());
    rec[i].trim().parse().map_err(|_| Error::parse(what, format!("line {line}: bad value '{}'", &rec[i])))
}

pub fn write_ground_truth(records: &[GroundTruthRecord]) -> String {
    let mut w = writer();
    w.write_record(GT_HEADER).expect("in-memory write");
    for r in records {
        let (c, e) = (r.bbox.center(), r.bbox.extents());
        let mut row = vec![r.frame.to_string(), r.identity.clone()];
        row.extend(c.iter().chain(&e).map(|v| v.to_string()));
        w.write_record(&row).expect("in-memory write");
    }
    finish(w)
}

pub fn read_ground_truth(text: &str) -> Result<Vec<GroundTruthRecord>> {
    let what = "groundtruth.csv";
    records(text, what, &GT_HEADER)?
        .iter()
        .map(|rec| {
            let frame: u64 = field(rec, 0, what)?;
            let identity = rec[1].to_string();
            if identity.is_empty() {
                return Err(Error::Schema(format!("{what}: empty identity at frame {frame}")));
            }
            let v: Vec<f64> = (2..8).map(|i| field(rec, i, what)).collect::<Result<_>>()?;
            check_finite(&v, || format!("{what} frame {frame}"))?;
            let bbox = BoundingBox3D::new([v[0], v[1], v[2]], [v[3], v[4], v[5]])?;
            Ok(GroundTruthRecord { frame, identity, bbox })
        })
        .collect()
}

pub fn write_events(events: &[ProximityEvent]) -> String {
    let mut w = writer();
    w.write_record(EVENT_HEADER).expect("in-memory write");
    for e in events {
        w.write_record([
            e.roi.clone(),
            e.identity.clone(),
            e.enter_s.to_string(),
            e.exit_s.to_string(),
            e.min_dist_m.to_string(),
        ])
        .expect("in-memory write");
    }
    finish(w)
}

pub fn read_events(text: &str) -> Result<Vec<ProximityEvent>> {
    let what = "events.csv";
    records(text, what, &EVENT_HEADER)?
        .iter()
        .map(|rec| {
            Ok(ProximityEvent {
                roi: rec[0].to_string(),
                identity: rec[1].to_string(),
                enter_s: field(rec, 2, what)?,
                exit_s: field(rec, 3, what)?,
                min_dist_m: field(rec, 4, what)?,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ground_truth_round_trip() {
        let recs = vec![
            GroundTruthRecord {
                frame: 0,
                identity: "a,b".into(),
                bbox: BoundingBox3D::new([0.1, 2.0 / 3.0, 0.9], [0.6, 0.6, 1.8]).unwrap(),
            },
            GroundTruthRecord {
                frame: 7,
                identity: "c".into(),
                bbox: BoundingBox3D::new([1e-7, -3.5, 0.9], [0.6, 0.6, 1.8]).unwrap(),
            },
        ];
        let text = write_ground_truth(&recs);
        assert!(text.starts_with("frame,identity,cx,cy,cz,ex,ey,ez\n"));
        assert_eq!(read_ground_truth(&text).unwrap(), recs);
    }

    #[test]
    fn ground_truth_errors() {
        assert_eq!(read_ground_truth("frame,id\n").unwrap_err().code(), "E_SCHEMA");
        let nan = "frame,identity,cx,cy,cz,ex,ey,ez\n0,a,NaN,0,0,1,1,1\n";
        assert_eq!(read_ground_truth(nan).unwrap_err().code(), "E_NONFINITE");
        let bad = "frame,identity,cx,cy,cz,ex,ey,ez\n0,a,x,0,0,1,1,1\n";
        assert_eq!(read_ground_truth(bad).unwrap_err().code(), "E_PARSE");
    }

    #[test]
    fn events_round_trip() {
        let ev = vec![ProximityEvent {
            roi: "table".into(),
            identity: "staff_01".into(),
            enter_s: 1.5,
            exit_s: 3.25,
            min_dist_m: 0.0,
        }];
        assert_eq!(read_events(&write_events(&ev)).unwrap(), ev);
    }
}
