#include "depheavy/metadata.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>
#include <tuple>

#include "depheavy/error.hpp"

namespace depheavy {

namespace {

bool is_space(char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v'; }

std::string_view trim(std::string_view s) {
  while (!s.empty() && is_space(s.front())) s.remove_prefix(1);
  while (!s.empty() && is_space(s.back())) s.remove_suffix(1);
  return s;
}

std::string collapse_whitespace(std::string_view s) {
  std::string out;
  bool pending_space = false;
  for (char c : trim(s)) {
    if (is_space(c)) {
      pending_space = true;
      continue;
    }
    if (pending_space && !out.empty()) out.push_back(' ');
    pending_space = false;
    out.push_back(c);
  }
  return out;
}

// Replaces every invalid UTF-8 sequence with U+FFFD.
std::string sanitize_utf8(std::string_view in) {
  static constexpr std::string_view kReplacement = "\xEF\xBF\xBD";
  std::string out;
  out.reserve(in.size());
  std::size_t i = 0;
  while (i < in.size()) {
    const auto c = static_cast<unsigned char>(in[i]);
    std::size_t len = 0;
    std::uint32_t min = 0;
    if (c < 0x80) {
      out.push_back(static_cast<char>(c));
      ++i;
      continue;
    } else if ((c & 0xE0) == 0xC0) {
      len = 2, min = 0x80;
    } else if ((c & 0xF0) == 0xE0) {
      len = 3, min = 0x800;
    } else if ((c & 0xF8) == 0xF0) {
      len = 4, min = 0x10000;
    }
    bool ok = len != 0 && i + len <= in.size();
    std::uint32_t cp = ok ? (c & (0xFF >> (len + 1))) : 0;
    for (std::size_t k = 1; ok && k < len; ++k) {
      const auto cc = static_cast<unsigned char>(in[i + k]);
      if ((cc & 0xC0) != 0x80) ok = false;
      cp = (cp << 6) | (cc & 0x3F);
    }
    ok = ok && cp >= min && cp <= 0x10FFFF && !(cp >= 0xD800 && cp <= 0xDFFF);
    if (ok) {
      out.append(in.substr(i, len));
      i += len;
    } else {
      out.append(kReplacement);
      ++i;
    }
  }
  return out;
}

std::vector<std::string_view> split_lines(std::string_view text) {
  std::vector<std::string_view> lines;
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(start, end - start);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    lines.push_back(line);
    if (end == text.size()) break;
    start = end + 1;
  }
  return lines;
}

struct Field {
  std::string name;
  std::string value;
  std::size_t line = 0;
};

void dedupe_declarations(std::vector<DepDeclaration>& decls) {
  std::vector<DepDeclaration> unique;
  unique.reserve(decls.size());
  for (auto& d : decls) {
    auto same = [&](const DepDeclaration& u) {
      return u.name == d.name && u.field_kind == d.field_kind;
    };
    if (std::none_of(unique.begin(), unique.end(), same)) unique.push_back(std::move(d));
  }
  decls = std::move(unique);
}

std::string lower(std::string_view s) {
  std::string out(s);
  for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

std::vector<std::string> split_csv_row(std::string_view line) {
  std::vector<std::string> cells;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        cur.push_back('"');
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        cur.push_back(c);
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      cells.emplace_back(trim(cur));
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  cells.emplace_back(trim(cur));
  return cells;
}

constexpr std::string_view kEdgeListHeader = "child,parent,relation";

}  // namespace

std::string_view to_string(FieldKind kind) {
  switch (kind) {
    case FieldKind::Depends: return "Depends";
    case FieldKind::Imports: return "Imports";
    case FieldKind::LinkingTo: return "LinkingTo";
    case FieldKind::Suggests: return "Suggests";
    case FieldKind::Enhances: return "Enhances";
  }
  return "Imports";
}

std::optional<FieldKind> field_kind_from_string(std::string_view name) {
  for (FieldKind k : kAllFieldKinds)
    if (to_string(k) == name) return k;
  return std::nullopt;
}

Repository Repository::parse(std::string_view tag) {
  const std::string t = lower(trim(tag));
  if (t == "cran") return cran();
  if (t == "bioconductor" || t == "bioc") return bioconductor();
  return other(std::string(trim(tag)));
}

std::string Repository::label() const {
  switch (kind_) {
    case Kind::CRAN: return "CRAN";
    case Kind::Bioconductor: return "Bioconductor";
    case Kind::Other: return other_;
  }
  return other_;
}

const std::set<std::string>& default_exclusions() {
  static const std::set<std::string> names = {
      "R",        "base",     "stats",      "utils",    "methods",   "graphics",
      "grDevices", "tools",   "datasets",   "parallel", "splines",   "grid",
      "compiler", "tcltk",    "stats4",     "Matrix",   "MASS",      "lattice",
      "survival", "nlme",     "mgcv",       "boot",     "class",     "cluster",
      "codetools", "foreign", "KernSmooth", "nnet",     "rpart",     "spatial"};
  return names;
}

bool valid_package_name(std::string_view name) {
  if (name.size() < 2) return false;
  if (!std::isalpha(static_cast<unsigned char>(name.front()))) return false;
  if (name.back() == '.') return false;
  return std::all_of(name.begin(), name.end(), [](char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '.';
  });
}

std::vector<DepDeclaration> parse_dep_field(std::string_view field_text, FieldKind kind) {
  std::vector<DepDeclaration> out;

  std::vector<std::string_view> entries;
  int depth = 0;
  std::size_t start = 0;
  for (std::size_t i = 0; i <= field_text.size(); ++i) {
    const char c = i < field_text.size() ? field_text[i] : ',';
    if (c == '(') ++depth;
    if (c == ')') --depth;
    if (c == ',' && (depth == 0 || i == field_text.size())) {
      entries.push_back(field_text.substr(start, i - start));
      start = i + 1;
      depth = 0;
    }
  }

  for (std::string_view raw : entries) {
    const std::string_view entry = trim(raw);
    if (entry.empty()) continue;
    const std::string shown = collapse_whitespace(entry);

    const auto open = entry.find('(');
    const auto close = entry.find(')');
    DepDeclaration decl;
    decl.field_kind = kind;
    if (open == std::string_view::npos && close == std::string_view::npos) {
      decl.name = collapse_whitespace(entry);
    } else {
      const bool balanced = open != std::string_view::npos && close != std::string_view::npos &&
                            open < close && entry.find('(', open + 1) == std::string_view::npos &&
                            entry.find(')', close + 1) == std::string_view::npos;
      if (!balanced)
        throw ParseError("unbalanced parenthesis in dependency entry '" + shown + "'", 0);
      if (!trim(entry.substr(close + 1)).empty())
        throw ParseError("unexpected text after version constraint in '" + shown + "'", 0);
      decl.name = collapse_whitespace(entry.substr(0, open));
      decl.version_constraint = collapse_whitespace(entry.substr(open + 1, close - open - 1));
    }
    if (decl.name.empty())
      throw ParseError("dependency entry without a package name: '" + shown + "'", 0);
    out.push_back(std::move(decl));
  }
  return out;
}

DcfParseResult parse_dcf(std::string_view raw_text, const Repository& repository) {
  DcfParseResult result;
  const std::string text = sanitize_utf8(raw_text);
  const auto lines = split_lines(text);

  std::vector<Field> fields;
  bool stanza_broken = false;
  std::size_t stanza_line = 0;

  auto flush = [&]() {
    if (fields.empty() && !stanza_broken) return;
    if (stanza_broken) {
      fields.clear();
      stanza_broken = false;
      return;
    }
    RawPackageRecord record;
    record.repository = repository;
    bool has_package = false;
    for (const auto& f : fields) {
      if (f.name == "Package") {
        record.name = std::string(trim(f.value));
        has_package = true;
      }
    }
    if (!has_package || record.name.empty()) {
      result.diagnostics.push_back(
          {Diagnostic::Severity::Error, stanza_line, "stanza without a Package field"});
      fields.clear();
      return;
    }
    for (const auto& f : fields) {
      const auto kind = field_kind_from_string(f.name);
      if (!kind) continue;
      try {
        auto decls = parse_dep_field(f.value, *kind);
        for (auto& d : decls) record.declarations.push_back(std::move(d));
      } catch (const ParseError& e) {
        result.diagnostics.push_back({Diagnostic::Severity::Error, f.line,
                                      record.name + " " + f.name + ": " + e.what()});
      }
    }
    dedupe_declarations(record.declarations);
    result.records.push_back(std::move(record));
    fields.clear();
  };

  for (std::size_t i = 0; i < lines.size(); ++i) {
    const std::string_view line = lines[i];
    const std::size_t lineno = i + 1;
    if (trim(line).empty()) {
      flush();
      continue;
    }
    if (fields.empty() && !stanza_broken) stanza_line = lineno;
    if (stanza_broken) continue;

    if (line.front() == ' ' || line.front() == '\t') {
      if (fields.empty()) {
        result.diagnostics.push_back(
            {Diagnostic::Severity::Error, lineno, "continuation line before any field"});
        stanza_broken = true;
        continue;
      }
      auto& value = fields.back().value;
      const auto piece = trim(line);
      if (!value.empty() && !piece.empty()) value.push_back(' ');
      value.append(piece);
      continue;
    }

    const auto colon = line.find(':');
    if (colon == std::string_view::npos || colon == 0) {
      result.diagnostics.push_back(
          {Diagnostic::Severity::Error, lineno, "expected 'Name: value' field"});
      stanza_broken = true;
      continue;
    }
    fields.push_back({std::string(line.substr(0, colon)),
                      std::string(trim(line.substr(colon + 1))), lineno});
  }
  flush();
  return result;
}

BuildResult build_database(std::vector<RawPackageRecord> records,
                           const std::set<std::string>& exclusions,
                           std::string snapshot_label) {
  BuildResult result;
  auto& db = result.database;
  db.excluded_names = exclusions;
  db.snapshot_label = std::move(snapshot_label);

  for (auto& rec : records) {
    if (!valid_package_name(rec.name))
      result.warnings.push_back({Diagnostic::Severity::Warning, 0,
                                 "package name '" + rec.name + "' does not match the name grammar"});
    dedupe_declarations(rec.declarations);
    auto [it, inserted] = db.packages.try_emplace(rec.name, rec);
    if (!inserted) {
      result.warnings.push_back(
          {Diagnostic::Severity::Warning, 0,
           "duplicate package '" + rec.name + "' (" + it->second.repository.label() +
               " replaced by " + rec.repository.label() + ")"});
      it->second = std::move(rec);
    }
  }

  for (auto& [_, rec] : db.packages) {
    for (auto& d : rec.declarations) {
      d.external = exclusions.contains(d.name) || !db.packages.contains(d.name);
    }
  }
  return result;
}

PackageDatabase read_edge_list(std::istream& in) {
  PackageDatabase db;
  std::string line;
  std::size_t lineno = 0;
  bool header_seen = false;
  bool has_repo_column = false;

  auto ensure = [&](const std::string& name) -> RawPackageRecord& {
    auto [it, inserted] = db.packages.try_emplace(name);
    if (inserted) it->second.name = name;
    return it->second;
  };

  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (lineno == 1 && line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0)
      line.erase(0, 3);
    if (trim(line).empty()) continue;
    auto cells = split_csv_row(line);
    if (!header_seen) {
      if (cells.size() < 3 || cells[0] != "child" || cells[1] != "parent" ||
          cells[2] != "relation" || (cells.size() == 4 && cells[3] != "repository") ||
          cells.size() > 4)
        throw ParseError("expected header 'child,parent,relation[,repository]'", lineno);
      has_repo_column = cells.size() == 4;
      header_seen = true;
      continue;
    }
    if (cells.size() < 3 || cells.size() > (has_repo_column ? 4u : 3u))
      throw ParseError("wrong number of columns", lineno);
    const std::string& child = cells[0];
    const std::string& parent = cells[1];
    const std::string& relation = cells[2];
    if (child.empty()) throw ParseError("empty child name", lineno);

    auto& rec = ensure(child);
    if (has_repo_column && cells.size() == 4 && !cells[3].empty())
      rec.repository = Repository::parse(cells[3]);

    if (parent.empty() && relation.empty()) continue;
    if (parent.empty()) throw ParseError("empty parent name", lineno);
    FieldKind kind;
    if (relation == "strong") {
      kind = FieldKind::Imports;
    } else if (relation == "weak") {
      kind = FieldKind::Suggests;
    } else {
      throw ParseError("unknown relation '" + relation + "' (expected strong or weak)", lineno);
    }
    if (parent == child) throw ParseError("self dependency on '" + child + "'", lineno);
    ensure(parent);
    auto& decls = db.packages[child].declarations;
    DepDeclaration decl{parent, kind, std::nullopt, false};
    if (std::find(decls.begin(), decls.end(), decl) == decls.end()) decls.push_back(decl);
  }
  return db;
}

PackageDatabase load_edge_list(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open edge list '" + path + "'");
  return read_edge_list(in);
}

void write_edge_list(const PackageDatabase& db, std::ostream& out) {
  out << kEdgeListHeader << ",repository\n";
  for (const auto& [name, rec] : db.packages) {
    std::set<std::pair<std::string, bool>> rows;  // (parent, strong)
    for (const auto& d : rec.declarations) {
      if (d.external) continue;
      rows.emplace(d.name, is_strong(d.field_kind));
    }
    // strong wins over weak for the same parent
    std::set<std::string> strong_parents;
    for (const auto& [p, s] : rows)
      if (s) strong_parents.insert(p);
    const std::string repo = rec.repository.label();
    bool any = false;
    for (const auto& [p, s] : rows) {
      if (!s && strong_parents.contains(p)) continue;
      out << name << ',' << p << ',' << (s ? "strong" : "weak") << ',' << repo << '\n';
      any = true;
    }
    if (!any) out << name << ",,," << repo << '\n';
  }
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

PackageDatabase load_database(const std::string& path, const Repository& repository,
                              std::vector<Diagnostic>* diagnostics) {
  const std::string text = read_text_file(path);
  std::string_view first = text;
  if (first.size() >= 3 && first.substr(0, 3) == "\xEF\xBB\xBF") first.remove_prefix(3);
  first = first.substr(0, first.find('\n'));
  if (trim(first).substr(0, kEdgeListHeader.size()) == kEdgeListHeader) {
    std::istringstream in(text);
    return read_edge_list(in);
  }
  auto parsed = parse_dcf(text, repository);
  auto built = build_database(std::move(parsed.records));
  if (diagnostics) {
    for (auto& d : parsed.diagnostics) diagnostics->push_back(std::move(d));
    for (auto& d : built.warnings) diagnostics->push_back(std::move(d));
  }
  return std::move(built.database);
}

}  // namespace depheavy
