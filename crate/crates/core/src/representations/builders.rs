use crate::error::{Error, Result};
use crate::event::{Event, Micros, SensorGeometry};
use crate::representations::{RepresentationKind, WindowImage};
use crate::window::EventWindow;

fn check_bounds(events: &[Event], geometry: SensorGeometry) -> Result<()> {
    match events.iter().position(|e| !geometry.contains(e.x, e.y)) {
        None => Ok(()),
        Some(index) => Err(Error::EventOutOfBounds {
            index,
            x: events[index].x,
            y: events[index].y,
            width: geometry.width,
            height: geometry.height,
        }),
    }
}

/// Window-normalised timestamp `(t - t0) / L` of an in-window event.
#[inline]
pub(crate) fn normalized_time(t: Micros, start: Micros, length: Micros) -> f32 {
    ((t - start) as f64 / length as f64) as f32
}

/// Locally-normalised event surface.
///
/// Starting from zeros, events are replayed oldest to newest and each writes
/// `(t - t0) / L` into its `(polarity, y, x)` cell, overwriting whatever an
/// earlier event left there. Values lie in `[0, 1)`; an event exactly at the
/// window start writes 0 and is indistinguishable from an empty cell.
pub fn build_lnes(window: &EventWindow<'_>, geometry: SensorGeometry) -> Result<WindowImage> {
    check_bounds(window.events, geometry)?;
    if window.length == 0 {
        return Err(Error::invalid("window length", "must be at least 1us"));
    }
    let mut img = WindowImage::zeros(RepresentationKind::Lnes, geometry, window.start, window.length);
    let plane = img.plane_len();
    let w = geometry.width as usize;
    for e in window.events {
        let idx = e.polarity.channel() * plane + e.y as usize * w + e.x as usize;
        img.data[idx] = normalized_time(e.t, window.start, window.length);
    }
    Ok(img)
}

/// Event occurrence image: 1 where at least one event of that polarity fired.
pub fn build_eoi(window: &EventWindow<'_>, geometry: SensorGeometry) -> Result<WindowImage> {
    check_bounds(window.events, geometry)?;
    let mut img = WindowImage::zeros(RepresentationKind::Eoi, geometry, window.start, window.length);
    let plane = img.plane_len();
    let w = geometry.width as usize;
    for e in window.events {
        img.data[e.polarity.channel() * plane + e.y as usize * w + e.x as usize] = 1.0;
    }
    Ok(img)
}

/// Two-channel event count image, one channel per polarity.
pub fn build_eci(window: &EventWindow<'_>, geometry: SensorGeometry) -> Result<WindowImage> {
    check_bounds(window.events, geometry)?;
    let mut img = WindowImage::zeros(RepresentationKind::Eci, geometry, window.start, window.length);
    let plane = img.plane_len();
    let w = geometry.width as usize;
    for e in window.events {
        img.data[e.polarity.channel() * plane + e.y as usize * w + e.x as usize] += 1.0;
    }
    Ok(img)
}

/// Single-channel event count image, ignoring polarity.
pub fn build_eci_s(window: &EventWindow<'_>, geometry: SensorGeometry) -> Result<WindowImage> {
    check_bounds(window.events, geometry)?;
    let mut img = WindowImage::zeros(RepresentationKind::EciS, geometry, window.start, window.length);
    let w = geometry.width as usize;
    for e in window.events {
        img.data[e.y as usize * w + e.x as usize] += 1.0;
    }
    Ok(img)
}

pub fn build(kind: RepresentationKind, window: &EventWindow<'_>, geometry: SensorGeometry) -> Result<WindowImage> {
    match kind {
        RepresentationKind::Lnes => build_lnes(window, geometry),
        RepresentationKind::Eoi => build_eoi(window, geometry),
        RepresentationKind::EciS => build_eci_s(window, geometry),
        RepresentationKind::Eci => build_eci(window, geometry),
    }
}

/// Exchanges the two channels at every pixel where `mask` is set.
/// `mask` is row-major, one flag per pixel.
pub fn swap_polarity(image: &WindowImage, mask: &[bool]) -> Result<WindowImage> {
    if image.channels() != 2 {
        return Err(Error::WrongRepresentation {
            kind: image.kind,
            expected: "a two-channel image",
        });
    }
    let plane = image.plane_len();
    if mask.len() != plane {
        return Err(Error::DimensionMismatch {
            expected: format!("{plane} mask entries"),
            actual: format!("{}", mask.len()),
        });
    }
    let mut out = image.clone();
    let (pos, neg) = out.data.split_at_mut(plane);
    for ((p, n), &flip) in pos.iter_mut().zip(neg.iter_mut()).zip(mask) {
        if flip {
            std::mem::swap(p, n);
        }
    }
    Ok(out)
}

/// Keeps only the trailing `new_length` of a window, so one recorded stream
/// serves several effective motion speeds.
pub fn rescale_window_length<'a>(window: &EventWindow<'a>, new_length: Micros) -> Result<EventWindow<'a>> {
    if new_length == 0 {
        return Err(Error::invalid("new_length", "must be at least 1us"));
    }
    Ok(window.trailing(new_length))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::event::Polarity::{Negative, Positive};

    const G: SensorGeometry = SensorGeometry { width: 4, height: 3 };

    fn window(events: &[Event]) -> EventWindow<'_> {
        EventWindow {
            start: 1_000_000,
            length: 100_000,
            events,
        }
    }

    #[test]
    fn empty_window_is_all_zero() {
        for kind in RepresentationKind::ALL {
            let img = build(kind, &window(&[]), G).unwrap();
            assert!(img.data.iter().all(|&v| v == 0.0));
            assert_eq!(img.data.len(), kind.channels() * 12);
        }
    }

    #[test]
    fn lnes_keeps_newest_value() {
        let ev = [
            Event::new(1, 2, 1_050_000, Positive),
            Event::new(1, 2, 1_075_000, Positive),
        ];
        let img = build_lnes(&window(&ev), G).unwrap();
        assert_eq!(img.get(0, 1, 2), 0.75);
        assert_eq!(img.get(1, 1, 2), 0.0);
    }

    #[test]
    fn lnes_channels_do_not_mix() {
        let ev = [
            Event::new(0, 0, 1_025_000, Positive),
            Event::new(0, 0, 1_099_000, Negative),
        ];
        let img = build_lnes(&window(&ev), G).unwrap();
        assert_eq!(img.get(0, 0, 0), 0.25);
        assert_eq!(img.get(1, 0, 0), 0.99);
    }

    #[test]
    fn eoi_flags_and_counts() {
        let mut ev = vec![Event::new(2, 1, 1_000_500, Positive); 5];
        ev.push(Event::new(3, 0, 1_000_600, Positive));
        ev.push(Event::new(3, 0, 1_000_700, Negative));
        let eoi = build_eoi(&window(&ev), G).unwrap();
        assert_eq!(eoi.get(0, 2, 1), 1.0);
        assert_eq!((eoi.get(0, 3, 0), eoi.get(1, 3, 0)), (1.0, 1.0));
    }

    #[test]
    fn counts_per_polarity_and_combined() {
        let mut ev = vec![Event::new(1, 1, 1_000_001, Positive); 3];
        ev.extend(vec![Event::new(1, 1, 1_000_002, Negative); 2]);
        let eci = build_eci(&window(&ev), G).unwrap();
        let eci_s = build_eci_s(&window(&ev), G).unwrap();
        assert_eq!((eci.get(0, 1, 1), eci.get(1, 1, 1)), (3.0, 2.0));
        assert_eq!(eci_s.get(0, 1, 1), 5.0);
    }

    #[test]
    fn out_of_bounds_event_is_named() {
        let ev = [Event::new(0, 0, 1_000_000, Positive), Event::new(4, 0, 1_000_001, Positive)];
        let err = build_lnes(&window(&ev), G).unwrap_err();
        assert!(matches!(err, Error::EventOutOfBounds { index: 1, x: 4, .. }), "{err}");
    }

    #[test]
    fn swap_on_one_pixel() {
        let ev = [
            Event::new(1, 0, 1_030_000, Positive),
            Event::new(1, 0, 1_080_000, Negative),
        ];
        let img = build_lnes(&window(&ev), G).unwrap();
        let mut mask = vec![false; 12];
        mask[1] = true;
        let swapped = swap_polarity(&img, &mask).unwrap();
        assert_eq!((swapped.get(0, 1, 0), swapped.get(1, 1, 0)), (0.8, 0.3));
        assert_eq!(swap_polarity(&img, &[false; 12]).unwrap(), img);
        let all = [true; 12];
        assert_eq!(swap_polarity(&swap_polarity(&img, &all).unwrap(), &all).unwrap(), img);
    }

    #[test]
    fn swap_rejects_single_channel() {
        let img = build_eci_s(&window(&[]), G).unwrap();
        assert!(swap_polarity(&img, &[false; 12]).is_err());
        let img = build_eci(&window(&[]), G).unwrap();
        assert!(swap_polarity(&img, &[false; 11]).is_err());
    }

    #[test]
    fn rescale_keeps_trailing_events() {
        let ev = [
            Event::new(0, 0, 1_010_000, Positive),
            Event::new(0, 0, 1_070_000, Positive),
            Event::new(0, 0, 1_099_999, Positive),
        ];
        let w = window(&ev);
        let short = rescale_window_length(&w, 33_000).unwrap();
        assert_eq!(short.start, 1_067_000);
        assert_eq!(short.events.len(), 2);
        assert_eq!(rescale_window_length(&w, 100_000).unwrap(), w);
        assert!(rescale_window_length(&w, 0).is_err());
    }
}
