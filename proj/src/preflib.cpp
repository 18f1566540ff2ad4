#include "proxyvote/preflib.hpp"

#include <algorithm>
#include <fstream>
#include <numeric>
#include <ostream>
#include <sstream>

#include "proxyvote/analytics.hpp"
#include "proxyvote/binary.hpp"
#include "proxyvote/proxy.hpp"
#include "proxyvote/text.hpp"

namespace proxyvote {

ParseError::ParseError(const std::string& what, long line)
    : std::runtime_error(line > 0 ? "line " + std::to_string(line) + ": " + what : what), line_(line) {}

long Rankings::voters() const { return std::accumulate(counts.begin(), counts.end(), 0L); }

namespace {

struct Header {
  int alternatives = 0;
  std::vector<std::string> names;
};

// Reads `# NUMBER ALTERNATIVES: m` and `# ALTERNATIVE NAME i: name`.
void read_header_line(std::string_view line, Header& h) {
  line = text::trim(line.substr(1));
  const auto colon = line.find(':');
  if (colon == std::string_view::npos) return;
  const std::string_view key = text::trim(line.substr(0, colon));
  const std::string_view value = text::trim(line.substr(colon + 1));
  if (key == "NUMBER ALTERNATIVES") {
    h.alternatives = static_cast<int>(text::to_int(value));
  } else if (key.starts_with("ALTERNATIVE NAME ")) {
    const auto id = text::to_int(key.substr(17));
    if (id >= 1) {
      if (h.names.size() < static_cast<std::size_t>(id)) h.names.resize(static_cast<std::size_t>(id));
      h.names[static_cast<std::size_t>(id - 1)] = std::string(value);
    }
  }
}

// `count: body`; returns false for blank lines.
bool split_ballot(std::string_view line, long lineno, long& count, std::string_view& body) {
  line = text::trim(line);
  if (line.empty()) return false;
  const auto colon = line.find(':');
  if (colon == std::string_view::npos) throw ParseError("expected 'count: ballot'", lineno);
  try {
    count = text::to_int(text::trim(line.substr(0, colon)));
  } catch (const std::exception&) {
    throw ParseError("bad multiplicity", lineno);
  }
  if (count < 0) throw ParseError("negative multiplicity", lineno);
  body = text::trim(line.substr(colon + 1));
  return true;
}

// Splits a tied-order body into groups: `{1,2},3,{4}` -> {{1,2},{3},{4}}.
std::vector<std::vector<int>> parse_groups(std::string_view body, long lineno) {
  std::vector<std::vector<int>> groups;
  std::size_t i = 0;
  auto skip_space = [&] {
    while (i < body.size() && (body[i] == ' ' || body[i] == '\t')) ++i;
  };
  auto read_id = [&](std::string_view tok) {
    try {
      return static_cast<int>(text::to_int(text::trim(tok)));
    } catch (const std::exception&) {
      throw ParseError("bad alternative id '" + std::string(tok) + "'", lineno);
    }
  };
  while (true) {
    skip_space();
    if (i >= body.size()) break;
    std::vector<int> group;
    if (body[i] == '{') {
      const auto close = body.find('}', i);
      if (close == std::string_view::npos) throw ParseError("unclosed '{'", lineno);
      const std::string_view inner = text::trim(body.substr(i + 1, close - i - 1));
      if (!inner.empty())
        for (auto tok : text::split(inner, ',')) group.push_back(read_id(tok));
      i = close + 1;
    } else {
      auto end = body.find(',', i);
      if (end == std::string_view::npos) end = body.size();
      group.push_back(read_id(body.substr(i, end - i)));
      i = end;
    }
    groups.push_back(std::move(group));
    skip_space();
    if (i < body.size()) {
      if (body[i] != ',') throw ParseError("expected ',' between groups", lineno);
      ++i;
    }
  }
  return groups;
}

BinaryDataset parse_csv_rows(std::istream& in, std::string_view header, long& lineno, const std::string& source) {
  const auto cols = text::split(header, ',');
  if (cols.size() < 2) throw ParseError("CSV header needs at least one bit column", lineno);
  const int k = static_cast<int>(cols.size()) - 1;
  std::vector<std::string> rows;
  std::string line;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string_view t = text::trim(line);
    if (t.empty() || t.front() == '#') continue;
    const auto cells = text::split(t, ',');
    if (static_cast<int>(cells.size()) != k + 1) throw ParseError("expected " + std::to_string(k + 1) + " fields", lineno);
    std::string bits;
    for (int j = 1; j <= k; ++j) {
      const std::string_view c = text::trim(cells[static_cast<std::size_t>(j)]);
      if (c != "0" && c != "1") throw ParseError("bit fields must be 0 or 1", lineno);
      bits += c;
    }
    rows.push_back(std::move(bits));
  }
  BinaryDataset ds;
  ds.matrix = rows.empty() ? BitMatrix(0, k) : BitMatrix::from_strings(rows);
  for (int j = 1; j <= k; ++j) ds.labels.emplace_back(text::trim(cols[static_cast<std::size_t>(j)]));
  ds.source = source;
  ds.kind = "csv";
  ds.alternatives = k;
  return ds;
}

std::ifstream open_or_throw(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  return in;
}

}  // namespace

BinaryDataset parse_approval(std::istream& in, const std::string& source) {
  Header header;
  std::vector<std::pair<long, std::vector<int>>> ballots;
  std::string line;
  long lineno = 0;
  int max_id = 0;
  bool seen_data = false;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string_view t = text::trim(line);
    if (t.empty()) continue;
    if (t.front() == '#') {
      read_header_line(t, header);
      continue;
    }
    if (!seen_data && t.starts_with("voter_id")) return parse_csv_rows(in, t, lineno, source);
    seen_data = true;
    long count = 0;
    std::string_view body;
    if (!split_ballot(t, lineno, count, body)) continue;
    auto groups = parse_groups(body, lineno);
    std::vector<int> approved = groups.empty() ? std::vector<int>{} : std::move(groups.front());
    for (int id : approved) {
      if (id < 1) throw ParseError("alternative id " + std::to_string(id) + " out of range", lineno);
      if (header.alternatives > 0 && id > header.alternatives)
        throw ParseError("alternative id " + std::to_string(id) + " out of range", lineno);
      max_id = std::max(max_id, id);
    }
    for (const auto& g : groups)
      for (int id : g) max_id = std::max(max_id, id);
    ballots.emplace_back(count, std::move(approved));
  }
  const int k = header.alternatives > 0 ? header.alternatives : max_id;
  if (k < 1) throw ParseError("no alternatives found", 0);

  long rows = 0;
  for (const auto& b : ballots) rows += b.first;
  BinaryDataset ds;
  ds.matrix = BitMatrix(rows, k);
  Eigen::Index r = 0;
  for (const auto& [count, approved] : ballots)
    for (long c = 0; c < count; ++c, ++r)
      for (int id : approved) ds.matrix.set(r, id - 1, true);
  for (int j = 1; j <= k; ++j) {
    const auto idx = static_cast<std::size_t>(j - 1);
    ds.labels.push_back(idx < header.names.size() && !header.names[idx].empty() ? header.names[idx]
                                                                                  : std::to_string(j));
  }
  ds.source = source;
  ds.kind = "approval";
  ds.alternatives = k;
  return ds;
}

BinaryDataset parse_approval(const std::filesystem::path& path) {
  auto in = open_or_throw(path);
  return parse_approval(in, path.filename().string());
}

Rankings parse_strict_orders(std::istream& in, IncompleteBallots policy, const std::string& source) {
  Header header;
  Rankings r;
  r.source = source;
  std::string line;
  long lineno = 0;
  std::vector<std::pair<long, std::vector<std::vector<int>>>> raw;
  std::vector<long> raw_lines;
  int max_id = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string_view t = text::trim(line);
    if (t.empty()) continue;
    if (t.front() == '#') {
      read_header_line(t, header);
      continue;
    }
    long count = 0;
    std::string_view body;
    if (!split_ballot(t, lineno, count, body)) continue;
    auto groups = parse_groups(body, lineno);
    for (const auto& g : groups)
      for (int id : g) {
        if (id < 1 || (header.alternatives > 0 && id > header.alternatives))
          throw ParseError("alternative id " + std::to_string(id) + " out of range", lineno);
        max_id = std::max(max_id, id);
      }
    raw.emplace_back(count, std::move(groups));
    raw_lines.push_back(lineno);
  }
  const int m = header.alternatives > 0 ? header.alternatives : max_id;
  if (m < 1) throw ParseError("no alternatives found", 0);
  r.alternatives = m;

  for (std::size_t b = 0; b < raw.size(); ++b) {
    const auto& [count, groups] = raw[b];
    std::vector<int> order;
    bool tie = false;
    for (const auto& g : groups) {
      if (g.size() != 1) tie = true;
      order.insert(order.end(), g.begin(), g.end());
    }
    std::vector<bool> seen(static_cast<std::size_t>(m) + 1, false);
    bool duplicate = false;
    for (int id : order) {
      if (seen[static_cast<std::size_t>(id)]) duplicate = true;
      seen[static_cast<std::size_t>(id)] = true;
    }
    const bool incomplete = static_cast<int>(order.size()) != m;
    if (tie || duplicate || incomplete) {
      if (policy == IncompleteBallots::Reject) {
        const char* why = duplicate ? "repeated alternative" : tie ? "tied alternatives" : "incomplete ballot";
        throw ParseError(why, raw_lines[b]);
      }
      r.dropped += count;
      continue;
    }
    r.orders.push_back(std::move(order));
    r.counts.push_back(count);
  }
  return r;
}

Rankings parse_strict_orders(const std::filesystem::path& path, IncompleteBallots policy) {
  auto in = open_or_throw(path);
  return parse_strict_orders(in, policy, path.filename().string());
}

BinaryDataset binarize_pairwise(const Rankings& r) {
  const int m = r.alternatives;
  if (r.orders.empty()) throw std::invalid_argument("binarize_pairwise: no rankings");
  BinaryDataset ds;
  for (int a = 1; a <= m; ++a)
    for (int b = a + 1; b <= m; ++b) ds.labels.push_back(std::to_string(a) + ">" + std::to_string(b));
  ds.matrix = BitMatrix(r.voters(), m * (m - 1) / 2);
  std::vector<int> pos(static_cast<std::size_t>(m) + 1);
  Eigen::Index row = 0;
  for (std::size_t o = 0; o < r.orders.size(); ++o) {
    const auto& order = r.orders[o];
    for (std::size_t p = 0; p < order.size(); ++p) pos[static_cast<std::size_t>(order[p])] = static_cast<int>(p);
    for (long c = 0; c < r.counts[o]; ++c, ++row) {
      int col = 0;
      for (int a = 1; a <= m; ++a)
        for (int b = a + 1; b <= m; ++b, ++col)
          if (pos[static_cast<std::size_t>(a)] < pos[static_cast<std::size_t>(b)]) ds.matrix.set(row, col, true);
    }
  }
  ds.source = r.source;
  ds.kind = "pairwise";
  ds.alternatives = m;
  ds.dropped = r.dropped;
  return ds;
}

std::vector<int> ranking_from_pairwise(const BitMatrix& bits, Eigen::Index row, int alternatives) {
  const int m = alternatives;
  if (bits.cols() != m * (m - 1) / 2) throw std::invalid_argument("ranking_from_pairwise: column count mismatch");
  std::vector<int> wins(static_cast<std::size_t>(m) + 1, 0);
  int col = 0;
  for (int a = 1; a <= m; ++a)
    for (int b = a + 1; b <= m; ++b, ++col) ++wins[static_cast<std::size_t>(bits.get(row, col) ? a : b)];
  std::vector<int> order(static_cast<std::size_t>(m));
  std::iota(order.begin(), order.end(), 1);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    return wins[static_cast<std::size_t>(a)] > wins[static_cast<std::size_t>(b)];
  });
  return order;
}

BinaryDataset subsample_issues(const BinaryDataset& ds, int k_sub, Stream& rng) {
  const int k = ds.matrix.cols();
  if (k_sub < 1 || k_sub > k)
    throw std::invalid_argument("subsample_issues: k_sub must lie in [1, " + std::to_string(k) + "]");
  const auto picked = sample_indices(k, k_sub, rng);
  std::vector<int> cols(picked.begin(), picked.end());
  BinaryDataset out;
  out.matrix = ds.matrix.select_columns(cols);
  for (int c : cols) out.labels.push_back(ds.labels[static_cast<std::size_t>(c)]);
  out.source = ds.source;
  out.kind = ds.kind;
  out.alternatives = ds.alternatives;
  out.dropped = ds.dropped;
  return out;
}

BinaryDataset load_dataset(const std::filesystem::path& path) {
  const std::string ext = path.extension().string();
  if (ext == ".soc" || ext == ".soi") return binarize_pairwise(parse_strict_orders(path, IncompleteBallots::Drop));
  if (ext == ".csv" || ext == ".toc" || ext == ".toi" || ext == ".cat") return parse_approval(path);
  throw std::invalid_argument("unrecognised dataset extension '" + ext + "'");
}

void write_dataset_csv(std::ostream& os, const BinaryDataset& ds) {
  os << "# source: " << ds.source << '\n'
     << "# kind: " << ds.kind << '\n'
     << "# alternatives: " << ds.alternatives << '\n'
     << "# voters: " << ds.matrix.rows() << '\n'
     << "# dropped: " << ds.dropped << '\n'
     << "# labels:";
  for (std::size_t j = 0; j < ds.labels.size(); ++j) os << (j ? "," : " ") << ds.labels[j];
  os << "\nvoter_id";
  for (int j = 1; j <= ds.matrix.cols(); ++j) os << ",bit_" << j;
  os << '\n';
  for (Eigen::Index i = 0; i < ds.matrix.rows(); ++i) {
    os << (i + 1);
    for (int j = 0; j < ds.matrix.cols(); ++j) os << ',' << (ds.matrix.get(i, j) ? '1' : '0');
    os << '\n';
  }
}

WeightProfile weight_profile(const BinaryDataset& ds, Eigen::Index n, long trials, std::uint64_t seed) {
  const Eigen::Index voters = ds.matrix.rows();
  if (n < 1 || n > voters) throw std::invalid_argument("weight_profile: n must lie in [1, voters]");
  if (trials < 1) throw std::invalid_argument("weight_profile: trials must be positive");
  const Eigen::VectorXd competence = empirical_competence(ds.matrix);
  Eigen::VectorXd total = Eigen::VectorXd::Zero(n);
  for (long t = 0; t < trials; ++t) {
    Stream rng = Stream::derive(seed, 0, static_cast<std::uint64_t>(t));
    const auto sample = sample_indices(voters, n, rng);
    const auto w = binary_weights(ds.matrix, sample);
    std::vector<Eigen::Index> by_rank(static_cast<std::size_t>(n));
    std::iota(by_rank.begin(), by_rank.end(), Eigen::Index{0});
    std::stable_sort(by_rank.begin(), by_rank.end(), [&](Eigen::Index a, Eigen::Index b) {
      return competence[sample[static_cast<std::size_t>(a)]] < competence[sample[static_cast<std::size_t>(b)]];
    });
    for (Eigen::Index r = 0; r < n; ++r) total[r] += w.weights[by_rank[static_cast<std::size_t>(r)]];
  }
  WeightProfile out;
  out.mean_weight = total / static_cast<double>(trials);
  out.spearman = n >= 2 ? spearman(Eigen::VectorXd::LinSpaced(n, 1.0, static_cast<double>(n)), out.mean_weight)
                        : std::nan("");
  return out;
}

}  // namespace proxyvote
