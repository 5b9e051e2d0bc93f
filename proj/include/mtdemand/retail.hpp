#pragma once

// Retail transactions to product-level tasks.
//
// Static-Top3: average daily demand at each product's three most frequently
// observed prices; the top two train, the third is held out.
// Exposure-Sequence: run-length encoding of the daily posted price; the first
// K runs train, run K+1 is held out.
//
// Prices are exact decimals held as integer thousandths, so price equality
// and run boundaries never depend on floating-point rounding.

#include <algorithm>
#include <array>
#include <cctype>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <istream>
#include <map>
#include <optional>
#include <random>
#include <ostream>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "mtdemand/csv.hpp"
#include "mtdemand/demand.hpp"
#include "mtdemand/error.hpp"
#include "mtdemand/estimators.hpp"
#include "mtdemand/info_design.hpp"
#include "mtdemand/meta.hpp"
#include "mtdemand/panel_io.hpp"
#include "mtdemand/rng.hpp"
#include "mtdemand/stats.hpp"

namespace mtdemand::retail {

using PriceUnits = std::int64_t;  // thousandths of the currency unit
inline constexpr double kPriceScale = 1000.0;

inline double to_price(PriceUnits u) { return static_cast<double>(u) / kPriceScale; }

struct TransactionRecord {
  std::string invoice_id;
  std::string stock_code;
  std::string description;
  std::int64_t quantity = 0;
  std::int32_t day = 0;     // days since 1970-01-01
  std::int32_t minute = 0;  // minute of day
  PriceUnits unit_price = 0;
  std::optional<std::string> customer_id;
  std::string country;
};

struct ParseStats {
  std::size_t rows = 0;
  std::size_t kept = 0;
  std::size_t cancelled = 0;
  std::size_t nonpositive = 0;
  std::size_t malformed = 0;
};

/// Exact decimal to thousandths; rounds half away from zero past the third
/// digit. Rejects exponents and stray characters.
inline std::optional<PriceUnits> parse_price_units(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  if (s.empty()) return std::nullopt;
  bool neg = false;
  if (s.front() == '-' || s.front() == '+') {
    neg = s.front() == '-';
    s.remove_prefix(1);
  }
  std::int64_t whole = 0, frac = 0;
  int frac_digits = 0;
  bool any = false, dot = false, round_up = false;
  for (char ch : s) {
    if (ch == '.') {
      if (dot) return std::nullopt;
      dot = true;
      continue;
    }
    if (ch < '0' || ch > '9') return std::nullopt;
    any = true;
    const int d = ch - '0';
    if (!dot) {
      if (whole > 1'000'000'000'000LL) return std::nullopt;
      whole = whole * 10 + d;
    } else if (frac_digits < 3) {
      frac = frac * 10 + d;
      ++frac_digits;
    } else if (frac_digits == 3) {
      round_up = d >= 5;
      ++frac_digits;
    }
  }
  if (!any) return std::nullopt;
  for (int i = std::min(frac_digits, 3); i < 3; ++i) frac *= 10;
  PriceUnits u = whole * 1000 + frac + (round_up ? 1 : 0);
  return neg ? -u : u;
}

/// Accepts "m/d/yyyy h:mm" and ISO "yyyy-mm-dd[ T]hh:mm[:ss]".
inline std::optional<std::pair<std::int32_t, std::int32_t>> parse_timestamp(std::string_view s) {
  std::vector<long long> parts;
  long long cur = -1;
  std::string seps;
  for (char ch : s) {
    if (ch >= '0' && ch <= '9') {
      cur = (cur < 0 ? 0 : cur * 10) + (ch - '0');
      if (cur > 100000) return std::nullopt;
    } else {
      if (cur >= 0) {
        parts.push_back(cur);
        seps.push_back(ch);
      } else if (ch != ' ') {
        return std::nullopt;
      }
      cur = -1;
    }
  }
  if (cur >= 0) parts.push_back(cur);
  if (parts.size() < 3) return std::nullopt;
  long long y, m, d;
  if (!seps.empty() && seps[0] == '/') {
    m = parts[0];
    d = parts[1];
    y = parts[2];
  } else if (!seps.empty() && seps[0] == '-') {
    y = parts[0];
    m = parts[1];
    d = parts[2];
  } else {
    return std::nullopt;
  }
  const long long hh = parts.size() > 3 ? parts[3] : 0;
  const long long mm = parts.size() > 4 ? parts[4] : 0;
  using namespace std::chrono;
  const year_month_day ymd{year{static_cast<int>(y)}, month{static_cast<unsigned>(m)},
                           day{static_cast<unsigned>(d)}};
  if (!ymd.ok() || hh > 23 || mm > 59) return std::nullopt;
  return std::pair{static_cast<std::int32_t>(sys_days(ymd).time_since_epoch().count()),
                   static_cast<std::int32_t>(hh * 60 + mm)};
}

inline std::string format_day(std::int32_t day) {
  using namespace std::chrono;
  const year_month_day ymd{sys_days{days{day}}};
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(ymd.year()),
                static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()));
  return buf;
}

/// Cleans while parsing: cancellation invoices ('C' prefix) and rows with
/// non-positive quantity or price are dropped; unparsable rows are skipped.
inline std::vector<TransactionRecord> parse_transactions(std::istream& in, ParseStats* stats = nullptr) {
  ParseStats local;
  ParseStats& st = stats ? *stats : local;
  st = ParseStats{};
  std::string line;
  if (!csv::read_record(in, line)) throw Error(ErrorKind::EmptyInput, "transaction file is empty");
  const auto header = csv::split_record(line);
  if (!header) throw Error(ErrorKind::MalformedRow, "bad transaction header");
  const std::size_t c_inv = csv::column_index(*header, "InvoiceNo");
  const std::size_t c_code = csv::column_index(*header, "StockCode");
  const std::size_t c_desc = csv::column_index(*header, "Description");
  const std::size_t c_qty = csv::column_index(*header, "Quantity");
  const std::size_t c_date = csv::column_index(*header, "InvoiceDate");
  const std::size_t c_price = csv::column_index(*header, "UnitPrice");
  const std::size_t c_cust = csv::column_index(*header, "CustomerID");
  const std::size_t c_country = csv::column_index(*header, "Country");

  std::vector<TransactionRecord> out;
  while (csv::read_record(in, line)) {
    if (line.empty() || line == "\r") continue;
    ++st.rows;
    const auto f = csv::split_record(line);
    if (!f || f->size() != header->size()) {
      ++st.malformed;
      continue;
    }
    const auto& r = *f;
    if (!r[c_inv].empty() && (r[c_inv][0] == 'C' || r[c_inv][0] == 'c')) {
      ++st.cancelled;
      continue;
    }
    const auto qty = csv::parse_int(r[c_qty]);
    const auto price = parse_price_units(r[c_price]);
    const auto ts = parse_timestamp(r[c_date]);
    if (!qty || !price || !ts || r[c_code].empty()) {
      ++st.malformed;
      continue;
    }
    if (*qty <= 0 || *price <= 0) {
      ++st.nonpositive;
      continue;
    }
    TransactionRecord t;
    t.invoice_id = r[c_inv];
    t.stock_code = r[c_code];
    t.description = r[c_desc];
    t.quantity = *qty;
    t.day = ts->first;
    t.minute = ts->second;
    t.unit_price = *price;
    if (!r[c_cust].empty()) t.customer_id = r[c_cust];
    t.country = r[c_country];
    out.push_back(std::move(t));
  }
  st.kept = out.size();
  return out;
}

// ---------------------------------------------------------------------------
// Per-product aggregation.

struct PriceLevel {
  PriceUnits price = 0;
  std::int32_t days = 0;        // distinct transaction days at this price
  std::int64_t quantity = 0;    // total quantity at this price
  double avg_daily_demand() const { return static_cast<double>(quantity) / days; }
};

struct ProductHistory {
  std::string product_id;
  std::string description;  // most frequent description, ties to the smallest
  std::vector<PriceLevel> levels;  // sorted by price
  /// day -> (price -> quantity)
  std::map<std::int32_t, std::map<PriceUnits, std::int64_t>> daily;
};

inline std::vector<ProductHistory> aggregate_products(const std::vector<TransactionRecord>& records) {
  std::map<std::string, ProductHistory> by_id;
  std::map<std::string, std::map<std::string, std::size_t>> desc_counts;
  for (const auto& t : records) {
    auto& h = by_id[t.stock_code];
    h.product_id = t.stock_code;
    h.daily[t.day][t.unit_price] += t.quantity;
    if (!t.description.empty()) ++desc_counts[t.stock_code][t.description];
  }
  std::vector<ProductHistory> out;
  out.reserve(by_id.size());
  for (auto& [id, h] : by_id) {
    std::size_t best = 0;
    for (const auto& [d, n] : desc_counts[id])
      if (n > best) {
        best = n;
        h.description = d;
      }
    std::map<PriceUnits, PriceLevel> lv;
    for (const auto& [day, prices] : h.daily)
      for (const auto& [p, q] : prices) {
        auto& l = lv[p];
        l.price = p;
        ++l.days;
        l.quantity += q;
      }
    for (const auto& [p, l] : lv) h.levels.push_back(l);
    out.push_back(std::move(h));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Features.

inline constexpr std::size_t kHashDim = 256;

/// Lower-cased alphanumeric tokens, FNV-1a hashed into kHashDim buckets with
/// counts, then L2-normalized.
inline std::vector<double> hash_features(std::string_view text, std::size_t dim = kHashDim) {
  std::vector<double> f(dim, 0.0);
  std::string tok;
  auto flush = [&] {
    if (tok.empty()) return;
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char ch : tok) {
      h ^= ch;
      h *= 1099511628211ULL;
    }
    f[h % dim] += 1.0;
    tok.clear();
  };
  for (char ch : text) {
    const unsigned char u = static_cast<unsigned char>(ch);
    if (std::isalnum(u))
      tok.push_back(static_cast<char>(std::tolower(u)));
    else
      flush();
  }
  flush();
  double n = 0;
  for (double x : f) n += x * x;
  if (n > 0)
    for (double& x : f) x /= std::sqrt(n);
  return f;
}

/// product_id,f_0,...,f_{d-1}; all rows must share one dimension.
inline std::map<std::string, std::vector<double>> read_embeddings_csv(std::istream& in) {
  std::string line;
  if (!csv::read_record(in, line)) throw Error(ErrorKind::EmptyInput, "embedding file is empty");
  const auto header = csv::split_record(line);
  if (!header) throw Error(ErrorKind::MalformedRow, "bad embedding header");
  const std::size_t c_id = csv::column_index(*header, "product_id");
  std::map<std::string, std::vector<double>> out;
  std::size_t row = 1;
  while (csv::read_record(in, line)) {
    ++row;
    if (line.empty()) continue;
    const auto f = csv::split_record(line);
    if (!f || f->size() != header->size())
      throw Error(ErrorKind::MalformedRow, "embedding row " + std::to_string(row));
    std::vector<double> v;
    for (std::size_t i = 0; i < f->size(); ++i) {
      if (i == c_id) continue;
      const auto x = csv::parse_double((*f)[i]);
      if (!x) throw Error(ErrorKind::MalformedRow, "embedding row " + std::to_string(row));
      v.push_back(*x);
    }
    out[(*f)[c_id]] = std::move(v);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Tasks.

enum class TaskKind { StaticTop3, ExposureSequence };

inline std::string_view to_string(TaskKind k) {
  return k == TaskKind::StaticTop3 ? "static-top3" : "exposure-sequence";
}

inline TaskKind parse_task_kind(std::string_view s) {
  if (s == "static-top3" || s == "StaticTop3") return TaskKind::StaticTop3;
  if (s == "exposure-sequence" || s == "ExposureSequence") return TaskKind::ExposureSequence;
  throw Error(ErrorKind::InvalidConfig, "unknown task kind '" + std::string(s) + "'");
}

struct PricePoint {
  PriceUnits price_units = 0;
  double demand = 0.0;  // average daily demand
  std::int32_t exposure = 0;

  double price() const { return to_price(price_units); }
};

struct RetailTask {
  std::string product_id;
  std::vector<double> features;
  std::vector<PricePoint> train_points;
  PricePoint holdout;
  TaskKind kind = TaskKind::StaticTop3;
  /// Every non-holdout price level (Static-Top3), used by the per-task fit.
  std::vector<PricePoint> history;
};

struct TaskBuildStats {
  std::size_t products = 0;
  std::size_t retained = 0;
  std::size_t dropped = 0;
};

using FeatureMap = std::map<std::string, std::vector<double>>;

inline std::vector<double> features_for(const ProductHistory& h, const FeatureMap* embeddings) {
  if (embeddings) {
    const auto it = embeddings->find(h.product_id);
    if (it != embeddings->end()) return it->second;
  }
  return hash_features(h.description);
}

/// Frequency order: more days first, then larger total quantity, then lower price.
inline bool more_frequent(const PriceLevel& a, const PriceLevel& b) {
  if (a.days != b.days) return a.days > b.days;
  if (a.quantity != b.quantity) return a.quantity > b.quantity;
  return a.price < b.price;
}

inline std::vector<RetailTask> build_static_top3(const std::vector<ProductHistory>& products,
                                                 TaskBuildStats* stats = nullptr,
                                                 const FeatureMap* embeddings = nullptr) {
  TaskBuildStats local;
  TaskBuildStats& st = stats ? *stats : local;
  st = TaskBuildStats{};
  std::vector<RetailTask> out;
  for (const auto& h : products) {
    ++st.products;
    if (h.levels.size() < 3) {
      ++st.dropped;
      continue;
    }
    std::vector<PriceLevel> ranked = h.levels;
    std::sort(ranked.begin(), ranked.end(), more_frequent);
    auto point = [](const PriceLevel& l) { return PricePoint{l.price, l.avg_daily_demand(), l.days}; };
    RetailTask t;
    t.product_id = h.product_id;
    t.kind = TaskKind::StaticTop3;
    t.features = features_for(h, embeddings);
    t.train_points = {point(ranked[0]), point(ranked[1])};
    t.holdout = point(ranked[2]);
    for (std::size_t i = 0; i < ranked.size(); ++i)
      if (i != 2) t.history.push_back(point(ranked[i]));
    out.push_back(std::move(t));
    ++st.retained;
  }
  return out;
}

struct ExposureRun {
  PriceUnits price_units = 0;
  std::int32_t exposure_days = 0;
  double avg_daily_demand = 0.0;
  std::int32_t first_day = 0;

  double price() const { return to_price(price_units); }
};

/// Posted price of a day: the price carrying the most quantity (ties go to
/// the lower price).
inline PriceUnits posted_price(const std::map<PriceUnits, std::int64_t>& prices) {
  PriceUnits best = prices.begin()->first;
  std::int64_t best_q = -1;
  for (const auto& [p, q] : prices)
    if (q > best_q) {
      best = p;
      best_q = q;
    }
  return best;
}

/// Run-length encodes a sorted daily series of (day, posted price, quantity).
/// Unobserved days between two observed days at the same price count as zero
/// demand days of that run when the gap is at most max_gap_days. A longer gap
/// ends the segment, so the result is a list of segments, each a list of runs
/// whose consecutive prices differ. Unobserved days at a price change belong
/// to neither run.
struct DailyObs {
  std::int32_t day = 0;
  PriceUnits price = 0;
  std::int64_t quantity = 0;
};

inline std::vector<std::vector<ExposureRun>> encode_runs(const std::vector<DailyObs>& series,
                                                         std::int32_t max_gap_days = 7) {
  std::vector<std::vector<ExposureRun>> segments;
  if (series.empty()) return segments;
  std::vector<ExposureRun> runs;
  double total = 0;
  std::int32_t prev_day = 0;
  auto close = [&] {
    if (!runs.empty() && runs.back().exposure_days > 0)
      runs.back().avg_daily_demand = total / runs.back().exposure_days;
  };
  for (std::size_t i = 0; i < series.size(); ++i) {
    const auto& o = series[i];
    const std::int32_t gap = i == 0 ? 0 : o.day - prev_day - 1;
    if (i == 0 || gap > max_gap_days) {
      close();
      if (!runs.empty()) segments.push_back(std::move(runs));
      runs.clear();
      runs.push_back(ExposureRun{o.price, 1, 0.0, o.day});
      total = static_cast<double>(o.quantity);
    } else if (o.price == runs.back().price_units) {
      runs.back().exposure_days += gap + 1;
      total += static_cast<double>(o.quantity);
    } else {
      close();
      runs.push_back(ExposureRun{o.price, 1, 0.0, o.day});
      total = static_cast<double>(o.quantity);
    }
    prev_day = o.day;
  }
  close();
  segments.push_back(std::move(runs));
  return segments;
}

inline std::vector<DailyObs> daily_series(const ProductHistory& h) {
  std::vector<DailyObs> s;
  for (const auto& [day, prices] : h.daily) {
    std::int64_t q = 0;
    const PriceUnits p = posted_price(prices);
    q = prices.at(p);
    s.push_back({day, p, q});
  }
  return s;
}

struct ExposureOptions {
  std::size_t k_obs = 2;
  std::int32_t max_gap_days = 7;
};

/// Uses the earliest segment with at least K+1 runs.
inline std::vector<RetailTask> build_exposure_sequence(const std::vector<ProductHistory>& products,
                                                       const ExposureOptions& opt = {},
                                                       TaskBuildStats* stats = nullptr,
                                                       const FeatureMap* embeddings = nullptr) {
  if (opt.k_obs < 2) throw Error(ErrorKind::InvalidConfig, "exposure sequence needs K >= 2");
  TaskBuildStats local;
  TaskBuildStats& st = stats ? *stats : local;
  st = TaskBuildStats{};
  std::vector<RetailTask> out;
  for (const auto& h : products) {
    ++st.products;
    const auto segments = encode_runs(daily_series(h), opt.max_gap_days);
    const std::vector<ExposureRun>* use = nullptr;
    for (const auto& seg : segments)
      if (seg.size() >= opt.k_obs + 1) {
        use = &seg;
        break;
      }
    if (!use) {
      ++st.dropped;
      continue;
    }
    auto point = [](const ExposureRun& r) {
      return PricePoint{r.price_units, r.avg_daily_demand, r.exposure_days};
    };
    RetailTask t;
    t.product_id = h.product_id;
    t.kind = TaskKind::ExposureSequence;
    t.features = features_for(h, embeddings);
    for (std::size_t k = 0; k < opt.k_obs; ++k) t.train_points.push_back(point((*use)[k]));
    t.holdout = point((*use)[opt.k_obs]);
    t.history = t.train_points;
    out.push_back(std::move(t));
    ++st.retained;
  }
  return out;
}

/// Catalogue statistics over all cleaned products: mean distinct prices, and
/// mean share of a product's (price, day) observations at its modal price.
struct CatalogueSummary {
  std::size_t products = 0;
  std::size_t products_with_3_prices = 0;
  double mean_distinct_prices = 0.0;
  double modal_day_share = 0.0;
  double top2_day_share = 0.0;
};

inline CatalogueSummary summarize(const std::vector<ProductHistory>& products) {
  CatalogueSummary s;
  for (const auto& h : products) {
    if (h.levels.empty()) continue;
    ++s.products;
    if (h.levels.size() >= 3) ++s.products_with_3_prices;
    s.mean_distinct_prices += static_cast<double>(h.levels.size());
    std::vector<PriceLevel> ranked = h.levels;
    std::sort(ranked.begin(), ranked.end(), more_frequent);
    double total = 0;
    for (const auto& l : ranked) total += l.days;
    s.modal_day_share += ranked[0].days / total;
    s.top2_day_share += (ranked[0].days + (ranked.size() > 1 ? ranked[1].days : 0)) / total;
  }
  if (s.products > 0) {
    s.mean_distinct_prices /= static_cast<double>(s.products);
    s.modal_day_share /= static_cast<double>(s.products);
    s.top2_day_share /= static_cast<double>(s.products);
  }
  return s;
}

// ---------------------------------------------------------------------------
// Evaluation.

struct HoldoutPrediction {
  double predicted = 0.0;
  double actual = 0.0;
  double exposure = 1.0;
};

/// sqrt(sum e (y - y_hat)^2 / sum e).
inline double exposure_weighted_rmse(const std::vector<HoldoutPrediction>& points) {
  if (points.empty()) throw Error(ErrorKind::EmptyInput, "no holdout points");
  double num = 0, den = 0;
  for (const auto& p : points) {
    if (!(p.exposure > 0)) throw Error(ErrorKind::InvalidConfig, "exposure must be positive");
    num += p.exposure * (p.actual - p.predicted) * (p.actual - p.predicted);
    den += p.exposure;
  }
  return std::sqrt(num / den);
}

inline double exposure_weighted_rmse(const std::vector<double>& predicted,
                                     const std::vector<PricePoint>& holdouts) {
  if (predicted.size() != holdouts.size())
    throw Error(ErrorKind::DimensionMismatch, "predictions and holdouts differ in length");
  std::vector<HoldoutPrediction> pts;
  for (std::size_t i = 0; i < predicted.size(); ++i)
    pts.push_back({predicted[i], holdouts[i].demand, static_cast<double>(holdouts[i].exposure)});
  return exposure_weighted_rmse(pts);
}

// ---------------------------------------------------------------------------
// Task files: panel CSV (k = K+1 is the holdout row) plus a features sidecar.

inline TaskPanel to_panel(const RetailTask& t, std::int64_t task_id, bool include_holdout) {
  TaskPanel p;
  p.task_id = task_id;
  p.context = t.features;
  p.exposures.emplace();
  auto add = [&](const PricePoint& pt) {
    p.prices.push_back(pt.price());
    p.demands.push_back(pt.demand);
    p.exposures->push_back(pt.exposure);
  };
  for (const auto& pt : t.train_points) add(pt);
  if (include_holdout) add(t.holdout);
  return p;
}

inline void write_tasks(std::ostream& panels_out, std::ostream& features_out,
                        const std::vector<RetailTask>& tasks) {
  std::vector<TaskPanel> panels;
  for (std::size_t i = 0; i < tasks.size(); ++i) {
    TaskPanel p = to_panel(tasks[i], static_cast<std::int64_t>(i), true);
    p.context.clear();
    panels.push_back(std::move(p));
  }
  write_panels_csv(panels_out, panels);
  const std::size_t dim = tasks.empty() ? 0 : tasks.front().features.size();
  features_out << "task_id,product_id";
  for (std::size_t j = 0; j < dim; ++j) features_out << ",f_" << j;
  features_out << '\n';
  for (std::size_t i = 0; i < tasks.size(); ++i) {
    features_out << i << ',' << csv::quote(tasks[i].product_id);
    for (double x : tasks[i].features) features_out << ',' << csv::format_double(x);
    features_out << '\n';
  }
}

// ---------------------------------------------------------------------------
// Benchmark.

enum class RetailMethod { DCMOML, META, META_NA, SHARED, PER_TASK };

inline std::string_view to_string(RetailMethod m) {
  switch (m) {
    case RetailMethod::DCMOML: return "DCMOML";
    case RetailMethod::META: return "META";
    case RetailMethod::META_NA: return "META-NA";
    case RetailMethod::SHARED: return "SHARED";
    case RetailMethod::PER_TASK: return "PER-TASK";
  }
  return "?";
}

inline RetailMethod parse_retail_method(std::string_view s) {
  if (s == "DCMOML") return RetailMethod::DCMOML;
  if (s == "META") return RetailMethod::META;
  if (s == "META-NA") return RetailMethod::META_NA;
  if (s == "SHARED") return RetailMethod::SHARED;
  if (s == "PER-TASK") return RetailMethod::PER_TASK;
  throw Error(ErrorKind::InvalidConfig, "unknown retail method '" + std::string(s) + "'");
}

inline bool applies_to(RetailMethod m, TaskKind k) {
  if (m == RetailMethod::META_NA) return k == TaskKind::ExposureSequence;
  if (m == RetailMethod::PER_TASK) return k == TaskKind::StaticTop3;
  return true;
}

namespace detail {

inline std::vector<TaskPanel> train_panels(const std::vector<RetailTask>& tasks) {
  std::vector<TaskPanel> out;
  for (std::size_t i = 0; i < tasks.size(); ++i)
    out.push_back(to_panel(tasks[i], static_cast<std::int64_t>(i), false));
  return out;
}

/// Support index s (all others are queries), K = 2 only.
inline TaskPanel reorder(const TaskPanel& p, std::size_t support) {
  TaskPanel q = p;
  const std::size_t other = 1 - support;
  q.prices = {p.prices[support], p.prices[other]};
  q.demands = {p.demands[support], p.demands[other]};
  q.exposures = std::vector<int>{(*p.exposures)[support], (*p.exposures)[other]};
  return q;
}

inline std::vector<double> meta_input(const TaskPanel& p, bool exposure_inputs) {
  const InputLayout layout{Design::META, p.context.size(), p.size(), exposure_inputs};
  return flatten(build_info_set(p, Design::META, final_index_assignment(p)), layout);
}

}  // namespace detail

/// Training set for one method. Exposure-Sequence learners also see
/// exposures; Static-Top3 learners see prices only, as in the task protocol.
inline TrainingSet retail_training_set(const std::vector<RetailTask>& tasks, RetailMethod method,
                                       std::uint64_t seed) {
  if (tasks.empty()) throw Error(ErrorKind::EmptyTrainSet, "no retail tasks");
  const bool with_exposure = tasks.front().kind == TaskKind::ExposureSequence;
  const auto panels = detail::train_panels(tasks);
  for (const auto& p : panels)
    if (p.size() != 2) throw Error(ErrorKind::InvalidConfig, "retail learners use K = 2");
  switch (method) {
    case RetailMethod::DCMOML:
      return build_training_set(panels, Design::DCMOML, LossMode::Averaged, seed, with_exposure);
    case RetailMethod::SHARED: {
      TrainingSet set;
      set.input_dim = panels.front().context.size();
      for (const auto& p : panels) {
        QueryAssignment a = final_index_assignment(p);
        set.examples.push_back({set.n_groups, p.context,
                                supervision_targets(p, Design::DCMOML, a, LossMode::Averaged)});
        set.group_task_ids.push_back(p.task_id);
        ++set.n_groups;
      }
      return set;
    }
    case RetailMethod::META:
    case RetailMethod::META_NA: {
      TrainingSet set;
      set.layout = InputLayout{Design::META, panels.front().context.size(), 2, with_exposure};
      set.input_dim = set.layout->dimension();
      for (const auto& p : panels) {
        const double e_total = (*p.exposures)[0] + (*p.exposures)[1];
        const std::vector<std::size_t> supports =
            method == RetailMethod::META ? std::vector<std::size_t>{0, 1} : std::vector<std::size_t>{0};
        for (std::size_t s : supports) {
          const TaskPanel q = detail::reorder(p, s);
          SupervisionTarget t{1, q.prices[1], q.demands[1], 1.0};
          // Symmetrized: each assignment carries its query's normalized exposure.
          if (method == RetailMethod::META) t.weight = (*q.exposures)[1] / e_total;
          set.examples.push_back({set.n_groups, detail::meta_input(q, with_exposure), {t}});
        }
        set.group_task_ids.push_back(p.task_id);
        ++set.n_groups;
      }
      return set;
    }
    case RetailMethod::PER_TASK:
      break;
  }
  throw Error(ErrorKind::InvalidConfig, "PER-TASK has no training set");
}

/// Holdout demand predictions. Symmetrized META averages the two support
/// choices; META-NA uses the most recent run as support.
inline std::vector<double> retail_predict(const std::vector<RetailTask>& tasks, RetailMethod method,
                                          const MetaModel* model) {
  std::vector<double> out;
  out.reserve(tasks.size());
  const bool with_exposure = !tasks.empty() && tasks.front().kind == TaskKind::ExposureSequence;
  for (std::size_t i = 0; i < tasks.size(); ++i) {
    const RetailTask& t = tasks[i];
    const double ph = t.holdout.price();
    const TaskPanel p = to_panel(t, static_cast<std::int64_t>(i), false);
    DemandParams th{};
    switch (method) {
      case RetailMethod::DCMOML:
        th = model->predict(build_info_set(p, Design::DCMOML, final_index_assignment(p)));
        break;
      case RetailMethod::SHARED:
        th = model->predict_input(p.context);
        break;
      case RetailMethod::META: {
        const DemandParams a = model->predict_input(detail::meta_input(detail::reorder(p, 0), with_exposure));
        const DemandParams b = model->predict_input(detail::meta_input(detail::reorder(p, 1), with_exposure));
        th = {0.5 * (a.theta0 + b.theta0), 0.5 * (a.theta1 + b.theta1)};
        break;
      }
      case RetailMethod::META_NA:
        th = model->predict_input(detail::meta_input(detail::reorder(p, p.size() - 1), with_exposure));
        break;
      case RetailMethod::PER_TASK: {
        TaskPanel h;
        h.task_id = static_cast<std::int64_t>(i);
        h.exposures.emplace();
        for (const auto& pt : t.history) {
          h.prices.push_back(pt.price());
          h.demands.push_back(pt.demand);
          h.exposures->push_back(pt.exposure);
        }
        th = task_ols(h, Weighting::Exposure).params;
        break;
      }
    }
    out.push_back(th.theta0 + th.theta1 * ph);
  }
  return out;
}

struct RetailBenchConfig {
  std::vector<RetailMethod> methods{RetailMethod::DCMOML, RetailMethod::META, RetailMethod::SHARED};
  std::vector<std::uint64_t> seeds{0, 1, 2, 3, 4};
  TrainConfig train = TrainConfig::retail();
};

struct RetailMethodResult {
  RetailMethod method = RetailMethod::DCMOML;
  std::vector<double> rmse;  // one per seed (one entry for PER-TASK)
  MeanSe summary;
};

inline std::vector<RetailMethodResult> retail_bench(const std::vector<RetailTask>& tasks,
                                                    const RetailBenchConfig& cfg) {
  if (tasks.empty()) throw Error(ErrorKind::EmptyTrainSet, "no retail tasks");
  std::vector<PricePoint> holdouts;
  for (const auto& t : tasks) holdouts.push_back(t.holdout);
  std::vector<RetailMethodResult> out;
  for (RetailMethod m : cfg.methods) {
    if (!applies_to(m, tasks.front().kind)) continue;
    RetailMethodResult r;
    r.method = m;
    if (m == RetailMethod::PER_TASK) {
      r.rmse.push_back(exposure_weighted_rmse(retail_predict(tasks, m, nullptr), holdouts));
    } else {
      for (std::uint64_t seed : cfg.seeds) {
        TrainConfig tc = cfg.train;
        tc.seed = seed;
        const TrainingSet set = retail_training_set(tasks, m, seed);
        const TrainResult fit = train_meta(set, tc);
        r.rmse.push_back(exposure_weighted_rmse(retail_predict(tasks, m, &fit.model), holdouts));
      }
    }
    r.summary = mean_se(r.rmse);
    out.push_back(std::move(r));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Synthetic transactions for fixtures and the smoke benchmark.

struct SyntheticRetailConfig {
  std::size_t n_products = 300;
  std::int32_t n_days = 365;
  std::int32_t start_day = 14944;  // 2010-12-01
  double confound_sigma = 0.05;    // manager signal noise, fraction of p*
  double level_spread = 0.08;      // relative spread of price levels around the signal
  double mean_run_days = 12.0;
  double sale_probability = 0.6;   // chance a posted day records any sale
  double mean_order_size = 12.0;   // lumpy wholesale orders
  double cancellation_rate = 0.01;
  double mean_level = 12.0;        // median intercept
  double latent_sd = 0.4;          // log-sd of the unobserved level factor
  std::uint64_t seed = 0;
};

/// Products belong to one of eight categories named in the description; the
/// category sets the price sensitivity. The demand level carries a latent
/// factor the description does not reveal, and managers price near the
/// optimum -theta0 / (2 theta1), so posted prices carry that latent factor.
inline std::vector<TransactionRecord> generate_transactions(const SyntheticRetailConfig& c) {
  static constexpr std::array<std::string_view, 8> kCategories{
      "mug", "candle", "lantern", "bag", "card", "clock", "tin", "frame"};
  static constexpr std::array<std::string_view, 8> kAdjectives{
      "red", "vintage", "heart", "retro", "floral", "white", "large", "small"};
  std::vector<TransactionRecord> out;
  std::size_t invoice = 500000;
  for (std::size_t i = 0; i < c.n_products; ++i) {
    Rng rng = Rng::stream(c.seed, StreamDomain::Fixture, i);
    const std::size_t cat = rng.below(kCategories.size());
    const double theta1 = -(1.0 + 0.5 * static_cast<double>(cat)) * (1.0 + 0.05 * rng.normal());
    const double theta0 = std::max(2.0, c.mean_level * std::exp(c.latent_sd * rng.normal()));
    const double p_star = -theta0 / (2.0 * theta1);
    const double signal = p_star * (1.0 + c.confound_sigma * rng.normal());
    const std::size_t n_levels = 3 + rng.below(3);
    std::set<PriceUnits> levels;
    while (levels.size() < n_levels) {
      const double p = signal * (1.0 + c.level_spread * rng.normal());
      const auto u = static_cast<PriceUnits>(std::llround(std::max(0.05, p) * 100.0)) * 10;
      levels.insert(u);
    }
    std::vector<PriceUnits> lv(levels.begin(), levels.end());
    // Level weights: one dominant level, the rest share the remainder.
    std::vector<double> w(lv.size());
    const std::size_t modal = rng.below(lv.size());
    for (std::size_t j = 0; j < lv.size(); ++j) w[j] = j == modal ? 3.0 : rng.uniform(0.2, 1.0);
    auto draw_level = [&](std::size_t avoid) {
      for (;;) {
        double tot = 0;
        for (std::size_t j = 0; j < w.size(); ++j)
          if (j != avoid) tot += w[j];
        double u = rng.uniform(0.0, tot);
        for (std::size_t j = 0; j < w.size(); ++j) {
          if (j == avoid) continue;
          if ((u -= w[j]) <= 0) return j;
        }
      }
    };
    const std::string code = "P" + std::to_string(10000 + i);
    const std::string desc = std::string(kAdjectives[rng.below(kAdjectives.size())]) + " " +
                             std::string(kAdjectives[rng.below(kAdjectives.size())]) + " " +
                             std::string(kCategories[cat]);
    std::size_t level = draw_level(lv.size());
    std::int32_t run_left = 1 + static_cast<std::int32_t>(-c.mean_run_days * std::log(rng.uniform(1e-12, 1.0)));
    for (std::int32_t d = 0; d < c.n_days; ++d) {
      if (run_left-- <= 0) {
        level = draw_level(level);
        run_left = static_cast<std::int32_t>(-c.mean_run_days * std::log(rng.uniform(1e-12, 1.0)));
      }
      if (rng.uniform() >= c.sale_probability) continue;
      const double price = to_price(lv[level]);
      const double mean = std::max(0.5, theta0 + theta1 * price) / c.sale_probability;
      std::poisson_distribution<int> orders(mean / c.mean_order_size);
      std::geometric_distribution<int> size(1.0 / c.mean_order_size);
      const int n_orders = orders(rng.engine());
      for (int o = 0; o < n_orders; ++o) {
        TransactionRecord t;
        t.invoice_id = std::to_string(invoice++);
        t.stock_code = code;
        t.description = desc;
        t.quantity = 1 + size(rng.engine());
        t.day = c.start_day + d;
        t.minute = 9 * 60 + static_cast<std::int32_t>(rng.below(480));
        t.unit_price = lv[level];
        t.customer_id = std::to_string(12000 + rng.below(5000));
        t.country = "United Kingdom";
        out.push_back(t);
        if (rng.uniform() < c.cancellation_rate) {
          t.invoice_id = "C" + std::to_string(invoice++);
          t.quantity = -t.quantity;
          out.push_back(std::move(t));
        }
      }
    }
  }
  return out;
}

inline void write_transactions_csv(std::ostream& out, const std::vector<TransactionRecord>& rows) {
  out << "InvoiceNo,StockCode,Description,Quantity,InvoiceDate,UnitPrice,CustomerID,Country\n";
  for (const auto& t : rows) {
    using namespace std::chrono;
    const year_month_day ymd{sys_days{days{t.day}}};
    char date[40];
    std::snprintf(date, sizeof date, "%u/%u/%d %d:%02d", static_cast<unsigned>(ymd.month()),
                  static_cast<unsigned>(ymd.day()), static_cast<int>(ymd.year()), t.minute / 60,
                  t.minute % 60);
    char price[32];
    std::snprintf(price, sizeof price, "%lld.%03lld", static_cast<long long>(t.unit_price / 1000),
                  static_cast<long long>(t.unit_price % 1000));
    out << csv::quote(t.invoice_id) << ',' << csv::quote(t.stock_code) << ','
        << csv::quote(t.description) << ',' << t.quantity << ',' << date << ',' << price << ','
        << (t.customer_id ? csv::quote(*t.customer_id) : std::string()) << ','
        << csv::quote(t.country) << '\n';
  }
}

}  // namespace mtdemand::retail
