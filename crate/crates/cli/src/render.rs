// SPDX-License-Identifier: Apache-2.0

//! Human-readable rendering of API responses.

use std::io::{self, Write};

use serde_json::Value;

fn s(v: &Value) -> String {
    match v {
        Value::String(x) => x.clone(),
        Value::Null => "-".into(),
        other => other.to_string(),
    }
}

pub fn bar_text(bar: &Value) -> String {
    bar.as_array()
        .map(|segs| {
            segs.iter()
                .map(|x| s(&x["name"]))
                .collect::<Vec<_>>()
                .join(" / ")
        })
        .unwrap_or_default()
}

fn list(v: &Value) -> String {
    match v.as_array() {
        Some(items) if !items.is_empty() => items.iter().map(s).collect::<Vec<_>>().join(", "),
        _ => "-".into(),
    }
}

pub fn user(out: &mut dyn Write, u: &Value) -> io::Result<()> {
    writeln!(out, "{}\t{}", s(&u["id"]), s(&u["username"]))
}

pub fn dir(out: &mut dyn Write, d: &Value) -> io::Result<()> {
    writeln!(out, "id          {}", s(&d["id"]))?;
    writeln!(out, "path        {}", bar_text(&d["bar"]))?;
    writeln!(out, "owner       {}", s(&d["owner"]))?;
    writeln!(out, "state       {}", s(&d["state"]))?;
    writeln!(out, "visibility  {}", s(&d["visibility"]))?;
    let viewer = &d["viewer"];
    writeln!(out, "roles       {}", list(&viewer["roles"]))?;
    writeln!(out, "rights      {}", list(&viewer["rights"]))?;
    writeln!(out, "membership  {}", s(&viewer["membership"]))
}

pub fn children(out: &mut dyn Write, view: &Value) -> io::Result<()> {
    let d = &view["directory"];
    let kids = view["children"].as_array().cloned().unwrap_or_default();
    let n = kids.len();
    writeln!(
        out,
        "{}\t{}\t({n} {})",
        s(&d["id"]),
        s(&d["name"]),
        if n == 1 { "child" } else { "children" }
    )?;
    for c in &kids {
        let mut flags = Vec::new();
        if c["state"] == "Trashed" {
            flags.push("trashed");
        }
        if c["visibility"] == "Private" {
            flags.push("private");
        }
        let flags = if flags.is_empty() {
            String::new()
        } else {
            format!("\t[{}]", flags.join(", "))
        };
        writeln!(out, "  {}\t{}{flags}", s(&c["id"]), s(&c["name"]))?;
    }
    Ok(())
}

pub fn matrix(out: &mut dyn Write, m: &Value) -> io::Result<()> {
    use domainhub_core::{Right, Role};
    write!(out, "{:<12}", "")?;
    for r in Right::ALL {
        write!(out, " {:>12}", r.name())?;
    }
    writeln!(out)?;
    for role in Role::ALL {
        write!(out, "{:<12}", role.name())?;
        for r in Right::ALL {
            let on = m[role.name()][r.name()].as_bool().unwrap_or(false);
            write!(out, " {:>12}", if on { "x" } else { "-" })?;
        }
        writeln!(out)?;
    }
    Ok(())
}

pub fn grants(out: &mut dyn Write, g: &Value) -> io::Result<()> {
    writeln!(out, "users   {}", list(&g["granted_users"]))?;
    writeln!(out, "groups  {}", list(&g["granted_groups"]))
}

pub fn group(out: &mut dyn Write, g: &Value) -> io::Result<()> {
    writeln!(out, "members    {}", list(&g["members"]))?;
    let pending: Vec<String> = g["pending"]
        .as_array()
        .map(|p| {
            p.iter()
                .map(|e| format!("{} (since {})", s(&e[0]), s(&e[1])))
                .collect()
        })
        .unwrap_or_default();
    writeln!(
        out,
        "pending    {}",
        if pending.is_empty() {
            "-".into()
        } else {
            pending.join(", ")
        }
    )?;
    writeln!(out, "blacklist  {}", list(&g["blacklist"]))
}

pub fn article_summary(out: &mut dyn Write, a: &Value) -> io::Result<()> {
    writeln!(
        out,
        "{}\t{}\t{}\t{}",
        s(&a["url"]),
        s(&a["title"]),
        s(&a["author"]),
        s(&a["published_at"])
    )
}

pub fn article(out: &mut dyn Write, a: &Value) -> io::Result<()> {
    writeln!(out, "{}  {}", s(&a["url"]), s(&a["title"]))?;
    writeln!(out, "in {}", bar_text(&a["bar"]))?;
    writeln!(out, "by {} at {}", s(&a["author"]), s(&a["published_at"]))?;
    if let Some(abs) = a["abstract"].as_str().filter(|x| !x.is_empty()) {
        writeln!(out, "\n{abs}")?;
    }
    if let Some(body) = a["body"].as_str().filter(|x| !x.is_empty()) {
        writeln!(out, "\n{body}")?;
    }
    if let Some(atts) = a["attachments"].as_array().filter(|x| !x.is_empty()) {
        writeln!(out, "\nattachments:")?;
        for att in atts {
            writeln!(out, "  {}\t{} bytes", s(&att["filename"]), s(&att["size"]))?;
        }
    }
    Ok(())
}

pub fn hit(out: &mut dyn Write, h: &Value) -> io::Result<()> {
    match h.get("article_url") {
        Some(url) => writeln!(
            out,
            "{}\t{}\t{}",
            s(url),
            s(&h["title"]),
            bar_text(&h["bar"])
        ),
        None => writeln!(out, "{}", bar_text(&h["bar"])),
    }
}

pub fn binding(out: &mut dyn Write, b: &Value) -> io::Result<()> {
    writeln!(
        out,
        "{}\t{}\t{}",
        s(&b["id"]),
        s(&b["label"]),
        if b["live"].as_bool() == Some(true) {
            "live"
        } else {
            "offline"
        }
    )
}

pub fn entry(out: &mut dyn Write, e: &Value) -> io::Result<()> {
    let kind = match e["kind"].as_str() {
        Some("Dir") => "dir",
        _ => "file",
    };
    if e["availability"] == "Unavailable" {
        return writeln!(out, "{}\t{}\tunavailable", s(&e["binding"]), s(&e["label"]));
    }
    writeln!(
        out,
        "{}\t{}/{}\t{kind}\t{}\t{}",
        s(&e["binding"]),
        s(&e["label"]),
        s(&e["name"]),
        s(&e["size"]),
        s(&e["modified"])
    )
}
