//! Text output with every float at 17 significant digits.

use serde_json::Value;

/// `d.dddddddddddddddde[-]x`; non-finite values print as `NaN`, `inf`, `-inf`.
pub fn fmt_f64(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        format!("{x}")
    }
}

fn write_value(v: &Value, out: &mut String) {
    match v {
        Value::Null => out.push_str("null"),
        Value::Bool(b) => out.push_str(if *b { "true" } else { "false" }),
        Value::Number(n) => {
            if n.is_f64() {
                match n.as_f64() {
                    Some(x) if x.is_finite() => out.push_str(&fmt_f64(x)),
                    _ => out.push_str("null"),
                }
            } else {
                out.push_str(&n.to_string());
            }
        }
        Value::String(s) => out.push_str(&Value::String(s.clone()).to_string()),
        Value::Array(items) => {
            out.push('[');
            for (i, item) in items.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                write_value(item, out);
            }
            out.push(']');
        }
        Value::Object(map) => {
            out.push('{');
            for (i, (k, item)) in map.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                out.push_str(&Value::String(k.clone()).to_string());
                out.push(':');
                write_value(item, out);
            }
            out.push('}');
        }
    }
}

/// Compact single-line JSON.
pub fn json_line(v: &Value) -> String {
    let mut s = String::new();
    write_value(v, &mut s);
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn seventeen_digits_round_trip() {
        for x in [0.1, 1.0 / 3.0, 2.0f64.sqrt() * 1e300, -5e-324, 123456789.0] {
            let s = fmt_f64(x);
            let mantissa = s
                .split('e')
                .next()
                .unwrap()
                .trim_start_matches('-')
                .replace('.', "");
            assert_eq!(mantissa.len(), 17);
            assert_eq!(s.parse::<f64>().unwrap(), x);
        }
    }

    #[test]
    fn json_keeps_integers_and_parses_back() {
        let v = json!({"t": 3, "x": 0.1, "name": "a\"b", "xs": [1.5, null], "ok": true});
        let line = json_line(&v);
        assert!(line.contains("\"t\":3"));
        assert!(line.contains("1.0000000000000001e-1"));
        let back: Value = serde_json::from_str(&line).unwrap();
        assert_eq!(back["x"].as_f64(), Some(0.1));
        assert_eq!(back["name"], "a\"b");
    }
}
