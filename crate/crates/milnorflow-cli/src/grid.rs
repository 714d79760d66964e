//! Grid syntax: `start:stop:step` (inclusive) or comma lists, mixed freely: `1:2:0.5,3`.

pub fn parse_grid(s: &str) -> Result<Vec<f64>, String> {
    let mut out = Vec::new();
    for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        let fields: Vec<&str> = part.split(':').collect();
        match fields.as_slice() {
            [v] => out.push(number(v)?),
            [a, b, c] => {
                let (start, stop, step) = (number(a)?, number(b)?, number(c)?);
                if !(step > 0.0) || stop < start {
                    return Err(format!("range '{part}' needs start <= stop and step > 0"));
                }
                let n = ((stop - start) / step + 1e-9).floor() as usize;
                if n > 1_000_000 {
                    return Err(format!("range '{part}' has too many points"));
                }
                out.extend((0..=n).map(|i| start + step * i as f64));
            }
            _ => return Err(format!("cannot parse grid element '{part}'")),
        }
    }
    if out.is_empty() {
        return Err("empty grid".into());
    }
    Ok(out)
}

fn number(s: &str) -> Result<f64, String> {
    let v: f64 = s.trim().parse().map_err(|_| format!("'{s}' is not a number"))?;
    if !v.is_finite() {
        return Err(format!("'{s}' is not finite"));
    }
    Ok(v)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ranges_and_lists() {
        assert_eq!(parse_grid("1:3:0.5").unwrap(), vec![1.0, 1.5, 2.0, 2.5, 3.0]);
        assert_eq!(parse_grid("0,0.5,0.8,0.9").unwrap(), vec![0.0, 0.5, 0.8, 0.9]);
        assert_eq!(parse_grid("1:2:1, 7").unwrap(), vec![1.0, 2.0, 7.0]);
        assert_eq!(parse_grid("0:1:0.1").unwrap().len(), 11);
    }

    #[test]
    fn rejects_bad_input() {
        for bad in ["", "a", "1:2", "3:1:1", "1:2:0", "1:2:-1", "nan", "inf"] {
            assert!(parse_grid(bad).is_err(), "{bad}");
        }
    }
}
