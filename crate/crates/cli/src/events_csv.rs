//! Text form of event streams: an optional `# steps=N step_us=M` line, then
//! `t,x,y,p` rows with `t` in microseconds and `p` 1 (positive) or 0
//! (negative).

use eventforge::{Event, Micros, Polarity};

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EventTable {
    pub events: Vec<Event>,
    /// Step count and step length declared by the directive line, if any.
    pub steps: Option<usize>,
    pub step_micros: Option<Micros>,
}

fn parse_directive(line: &str) -> CliResult<(Option<usize>, Option<Micros>)> {
    let mut steps = None;
    let mut step_micros = None;
    for item in line.trim_start_matches('#').split_whitespace() {
        let Some((key, value)) = item.split_once('=') else {
            continue;
        };
        let bad = |e: std::num::ParseIntError| CliError::data(format!("line 1: `{item}`: {e}"));
        match key {
            "steps" => steps = Some(value.parse().map_err(bad)?),
            "step_us" => step_micros = Some(value.parse().map_err(bad)?),
            _ => {}
        }
    }
    Ok((steps, step_micros))
}

pub fn parse_events_csv(text: &str) -> CliResult<EventTable> {
    let first = text.lines().next().unwrap_or("");
    let (steps, step_micros) = if first.starts_with('#') {
        parse_directive(first)?
    } else {
        (None, None)
    };
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .flexible(true)
        .from_reader(text.as_bytes());
    let mut events = Vec::new();
    let mut record = csv::StringRecord::new();
    let mut first_row = true;
    loop {
        match reader.read_record(&mut record) {
            Ok(false) => break,
            Ok(true) => {}
            Err(e) => {
                let line = e.position().map_or(0, |p| p.line());
                return Err(CliError::data(format!("line {line}: {e}")));
            }
        }
        let line = record.position().map_or(0, |p| p.line());
        if first_row && record.get(0).is_some_and(|f| f.parse::<u64>().is_err()) {
            first_row = false;
            continue;
        }
        first_row = false;
        let err = |msg: String| CliError::data(format!("line {line}: {msg}"));
        if record.len() != 4 {
            return Err(err(format!("expected 4 fields (t,x,y,p), found {}", record.len())));
        }
        let field = |i: usize, name: &str| -> CliResult<u64> {
            record[i].parse().map_err(|e| err(format!("{name} `{}`: {e}", &record[i])))
        };
        let t = field(0, "t")?;
        let x = u16::try_from(field(1, "x")?).map_err(|_| err(format!("x `{}` exceeds 65535", &record[1])))?;
        let y = u16::try_from(field(2, "y")?).map_err(|_| err(format!("y `{}` exceeds 65535", &record[2])))?;
        let polarity = match field(3, "p")? {
            1 => Polarity::Positive,
            0 => Polarity::Negative,
            p => return Err(err(format!("polarity must be 0 or 1, found {p}"))),
        };
        events.push(Event::new(x, y, t, polarity));
    }
    Ok(EventTable {
        events,
        steps,
        step_micros,
    })
}

pub fn write_events_csv(events: &[Event], steps: usize, step_micros: Micros) -> Vec<u8> {
    let mut out = format!("# steps={steps} step_us={step_micros}\n").into_bytes();
    let mut w = csv::Writer::from_writer(&mut out);
    w.write_record(["t", "x", "y", "p"]).expect("writing to memory");
    for e in events {
        let p = match e.polarity {
            Polarity::Positive => "1",
            Polarity::Negative => "0",
        };
        w.write_record([e.t.to_string().as_str(), &e.x.to_string(), &e.y.to_string(), p])
            .expect("writing to memory");
    }
    w.flush().expect("writing to memory");
    drop(w);
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_keeps_directive() {
        let events = vec![
            Event::new(3, 4, 0, Polarity::Positive),
            Event::new(239, 179, 2000, Polarity::Negative),
        ];
        let text = String::from_utf8(write_events_csv(&events, 7, 1000)).unwrap();
        let table = parse_events_csv(&text).unwrap();
        assert_eq!(table.events, events);
        assert_eq!(table.steps, Some(7));
        assert_eq!(table.step_micros, Some(1000));
    }

    #[test]
    fn headerless_rows_parse() {
        let t = parse_events_csv("5,1,2,0\n6,1,2,1\n").unwrap();
        assert_eq!(t.events.len(), 2);
        assert_eq!(t.steps, None);
    }

    #[test]
    fn errors_name_the_line() {
        let e = parse_events_csv("t,x,y,p\n1,2,3,1\n1,2,3,7\n").unwrap_err();
        assert!(e.to_string().starts_with("line 3:"), "{e}");
        let e = parse_events_csv("t,x,y,p\n1,2,3\n").unwrap_err();
        assert!(e.to_string().contains("expected 4 fields"), "{e}");
    }
}
