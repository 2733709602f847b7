#pragma once

// Package metadata ingestion: DCF package indexes (PACKAGES / DESCRIPTION
// style) and a plain child,parent,relation edge list, normalized into a
// PackageDatabase.

#include <cstddef>
#include <iosfwd>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace depheavy {

enum class FieldKind { Depends, Imports, LinkingTo, Suggests, Enhances };

inline constexpr FieldKind kAllFieldKinds[] = {FieldKind::Depends, FieldKind::Imports,
                                               FieldKind::LinkingTo, FieldKind::Suggests,
                                               FieldKind::Enhances};

std::string_view to_string(FieldKind kind);
std::optional<FieldKind> field_kind_from_string(std::string_view name);

/// Depends, Imports and LinkingTo are mandatory for installation.
constexpr bool is_strong(FieldKind kind) {
  return kind == FieldKind::Depends || kind == FieldKind::Imports ||
         kind == FieldKind::LinkingTo;
}

class Repository {
 public:
  enum class Kind { CRAN, Bioconductor, Other };

  Repository() = default;
  static Repository cran() { return Repository(Kind::CRAN, {}); }
  static Repository bioconductor() { return Repository(Kind::Bioconductor, {}); }
  static Repository other(std::string label) { return Repository(Kind::Other, std::move(label)); }
  /// "CRAN" and "Bioconductor" (case-insensitive, also "bioc") map to the
  /// named kinds; anything else is Other(tag).
  static Repository parse(std::string_view tag);

  Kind kind() const noexcept { return kind_; }
  std::string label() const;

  bool operator==(const Repository&) const = default;
  auto operator<=>(const Repository& o) const { return label() <=> o.label(); }

 private:
  Repository(Kind k, std::string other) : kind_(k), other_(std::move(other)) {}
  Kind kind_ = Kind::Other;
  std::string other_;
};

struct DepDeclaration {
  std::string name;
  FieldKind field_kind = FieldKind::Imports;
  std::optional<std::string> version_constraint;
  /// Set by build_database: excluded or not present in the database.
  bool external = false;

  bool operator==(const DepDeclaration&) const = default;
};

struct RawPackageRecord {
  std::string name;
  std::vector<DepDeclaration> declarations;
  Repository repository;
};

struct Diagnostic {
  enum class Severity { Warning, Error };
  Severity severity = Severity::Warning;
  std::size_t line = 0;  // 0 when not tied to an input line
  std::string message;
};

struct DcfParseResult {
  std::vector<RawPackageRecord> records;
  std::vector<Diagnostic> diagnostics;
};

struct PackageDatabase {
  std::map<std::string, RawPackageRecord> packages;
  std::set<std::string> excluded_names;
  std::string snapshot_label;
};

struct BuildResult {
  PackageDatabase database;
  std::vector<Diagnostic> warnings;
};

/// R itself plus the base and recommended packages.
const std::set<std::string>& default_exclusions();

/// Letters, digits and dots; starts with a letter; at least two characters;
/// no trailing dot.
bool valid_package_name(std::string_view name);

/// Splits a comma-separated dependency field. Whitespace (including
/// newlines) is trimmed around entries and collapsed to single spaces
/// inside version constraints. Throws ParseError naming the entry on
/// unbalanced parentheses or an empty package name.
std::vector<DepDeclaration> parse_dep_field(std::string_view field_text, FieldKind kind);

/// Parses a DCF document. Malformed stanzas are reported in `diagnostics`
/// with their line number and skipped; parsing continues with the next one.
DcfParseResult parse_dcf(std::string_view text, const Repository& repository);

/// Normalizes records: duplicate names resolve last-wins (with a warning),
/// duplicate declarations collapse, exclusions are recorded, and every
/// declaration naming an excluded or unknown package is flagged external.
BuildResult build_database(std::vector<RawPackageRecord> records,
                           const std::set<std::string>& exclusions = default_exclusions(),
                           std::string snapshot_label = {});

/// Edge-list CSV with header `child,parent,relation[,repository]`.
/// relation is `strong` (read as Imports) or `weak` (read as Suggests).
/// A row with empty parent and relation declares a package without edges.
PackageDatabase read_edge_list(std::istream& in);
PackageDatabase load_edge_list(const std::string& path);

/// Writes non-external declarations, one row per distinct
/// (child, parent, relation); packages without edges get a declaring row.
void write_edge_list(const PackageDatabase& db, std::ostream& out);

/// Reads either format: a file whose first line is the edge-list header is
/// read as an edge list, anything else as DCF tagged with `repository`.
PackageDatabase load_database(const std::string& path, const Repository& repository,
                              std::vector<Diagnostic>* diagnostics = nullptr);

std::string read_text_file(const std::string& path);

}  // namespace depheavy
