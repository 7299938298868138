use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};

use super::tsv::fmt_real;
use super::{BlockClass, BlockFlag, RoughnessClass, ThresholdConfig, NA};

fn opt_real(v: Option<f64>) -> String {
    v.map_or_else(|| NA.to_string(), fmt_real)
}

/// Flags arranged as rows of the printed grid, north row first.
fn layout(flags: &[BlockFlag]) -> Result<Vec<Vec<&BlockFlag>>> {
    let rows = flags.iter().map(|f| f.block.0 + 1).max().unwrap_or(0);
    let cols = flags.iter().map(|f| f.block.1 + 1).max().unwrap_or(0);
    if rows * cols != flags.len() || flags.is_empty() {
        return Err(Error::GridMismatch(format!(
            "{} flags do not form a complete grid",
            flags.len()
        )));
    }
    let mut grid: Vec<Vec<Option<&BlockFlag>>> = vec![vec![None; cols]; rows];
    for f in flags {
        let cell = &mut grid[rows - 1 - f.block.0][f.block.1];
        if cell.is_some() {
            return Err(Error::GridMismatch(format!("duplicate block {:?}", f.block)));
        }
        *cell = Some(f);
    }
    Ok(grid
        .into_iter()
        .map(|row| row.into_iter().map(|c| c.expect("all cells filled")).collect())
        .collect())
}

/// Spreadsheet-style grid: per block row a label line, the roughness of
/// database A, of database B, then the block classification.
pub fn render_grid_csv(flags: &[BlockFlag], t: &ThresholdConfig) -> Result<String> {
    let grid = layout(flags)?;
    let cols = grid[0].len();
    let pad = |s: &str| format!("{s}{}", ",".repeat(cols));
    let mut out = String::new();
    let _ = writeln!(out, ",North{}", ",".repeat(cols));
    for (i, row) in grid.iter().enumerate() {
        let labels: Vec<String> = row.iter().map(|f| format!("Block {}_{}", f.block.0, f.block.1)).collect();
        let (west, east) = if i == 0 { ("West", "East") } else { ("", "") };
        let _ = writeln!(out, "{west},{},{east}", labels.join(","));
        let a: Vec<String> = row.iter().map(|f| opt_real(f.rough_a)).collect();
        let _ = writeln!(out, ",{},", a.join(","));
        let b: Vec<String> = row.iter().map(|f| opt_real(f.rough_b)).collect();
        let _ = writeln!(out, ",{},", b.join(","));
        let c: Vec<&str> = row.iter().map(|f| f.classification.as_str()).collect();
        let _ = writeln!(out, ",{},", c.join(","));
    }
    let _ = writeln!(out, ",South{}", ",".repeat(cols));
    let _ = writeln!(out, "{}", pad(&format!(",green: roughness < {}", t.rough_low)));
    let _ = writeln!(out, "{}", pad(&format!(",red: roughness > {}", t.rough_high)));
    Ok(out)
}

/// CSS class of a block cell: the shared class when both databases fall in
/// the same band, "none" otherwise.
fn cell_class(f: &BlockFlag) -> &'static str {
    match (f.class_a, f.class_b) {
        (Some(a), Some(b)) if a == b => a.css(),
        _ => RoughnessClass::Neutral.css(),
    }
}

fn value_span(v: Option<f64>, class: Option<RoughnessClass>) -> String {
    let css = class.map_or("none", |c| c.css());
    format!("<span class=\"{css}\">{}</span>", opt_real(v))
}

pub fn render_grid_html(flags: &[BlockFlag], t: &ThresholdConfig) -> Result<String> {
    let grid = layout(flags)?;
    let cols = grid[0].len();
    let mut out = String::from(
        "<!DOCTYPE html>\n<html>\n<head>\n<meta charset=\"utf-8\">\n<title>Block roughness comparison</title>\n<style>\n\
         table { border-collapse: collapse; font-family: monospace; }\n\
         td { border: 1px solid #999; padding: 4px 8px; text-align: center; }\n\
         td.side { border: none; font-weight: bold; }\n\
         .green { background: #9fe39f; }\n\
         .red { background: #f29c9c; }\n\
         .none { background: transparent; }\n\
         .flag { display: block; font-weight: bold; color: #fff; background: #222; }\n\
         .suspect { display: block; font-style: italic; }\n\
         </style>\n</head>\n<body>\n<table>\n",
    );
    let _ = writeln!(out, "<tr><td class=\"side\"></td><td class=\"side\" colspan=\"{cols}\">North</td><td class=\"side\"></td></tr>");
    for (i, row) in grid.iter().enumerate() {
        out.push_str("<tr>");
        out.push_str(if i == 0 { "<td class=\"side\">West</td>" } else { "<td class=\"side\"></td>" });
        for f in row {
            let marker = match f.classification {
                BlockClass::Flagged => "<span class=\"flag\">FLAGGED</span>",
                BlockClass::Suspect => "<span class=\"suspect\">SUSPECT</span>",
                BlockClass::Ok => "",
            };
            let _ = write!(
                out,
                "<td class=\"{}\" data-block=\"{}_{}\" data-classification=\"{}\">Block {}_{}<br>{}<br>{}{}</td>",
                cell_class(f),
                f.block.0,
                f.block.1,
                f.classification.as_str(),
                f.block.0,
                f.block.1,
                value_span(f.rough_a, f.class_a),
                value_span(f.rough_b, f.class_b),
                marker
            );
        }
        out.push_str(if i == 0 { "<td class=\"side\">East</td>" } else { "<td class=\"side\"></td>" });
        out.push_str("</tr>\n");
    }
    let _ = writeln!(out, "<tr><td class=\"side\"></td><td class=\"side\" colspan=\"{cols}\">South</td><td class=\"side\"></td></tr>");
    out.push_str("</table>\n");
    let _ = writeln!(
        out,
        "<p><span class=\"green\">green</span>: roughness &lt; {} &nbsp; <span class=\"red\">red</span>: roughness &gt; {}</p>",
        t.rough_low, t.rough_high
    );
    out.push_str("</body>\n</html>\n");
    Ok(out)
}

/// Writes `report.csv` and `report.html` into `dir`.
pub fn render_grid_report(flags: &[BlockFlag], t: &ThresholdConfig, dir: &Path) -> Result<()> {
    let csv = render_grid_csv(flags, t)?;
    let html = render_grid_html(flags, t)?;
    let csv_path = dir.join("report.csv");
    fs::write(&csv_path, csv).map_err(|e| Error::io(&csv_path, e))?;
    let html_path = dir.join("report.html");
    fs::write(&html_path, html).map_err(|e| Error::io(&html_path, e))
}
