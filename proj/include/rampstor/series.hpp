#pragma once

// Timestamped price series: CSV ingestion, hour-window filtering and
// partitioning into fixed-length day blocks for backtests.
//
// CSV format: a header row, then `timestamp,price` rows with ISO-8601
// timestamps (YYYY-MM-DDTHH:MM[:SS], a space is accepted in place of 'T').
// Timestamps must be strictly increasing and prices finite and >= 0.

#include <cctype>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace rampstor {

struct Timestamp {
  int year = 0, month = 0, day = 0, hour = 0, minute = 0, second = 0;

  // Days since 1970-01-01 (civil calendar).
  std::int64_t civil_days() const {
    std::int64_t y = year;
    const int m = month, d = day;
    y -= m <= 2;
    const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
    const unsigned yoe = static_cast<unsigned>(y - era * 400);
    const unsigned doy = (153u * (m + (m > 2 ? -3 : 9)) + 2u) / 5u + d - 1;
    const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
    return era * 146097 + static_cast<std::int64_t>(doe) - 719468;
  }

  std::int64_t epoch_seconds() const {
    return civil_days() * 86400 + hour * 3600 + minute * 60 + second;
  }

  std::string date() const {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "%04d-%02d-%02d", year, month, day);
    return buf;
  }
};

struct PricePoint {
  Timestamp when;
  double price = 0.0;
};

struct PriceSeries {
  std::vector<PricePoint> points;

  std::vector<double> prices() const {
    std::vector<double> out;
    out.reserve(points.size());
    for (const auto& p : points) out.push_back(p.price);
    return out;
  }
};

namespace detail {

inline bool parse_timestamp(const std::string& text, Timestamp& out) {
  Timestamp ts;
  char sep = 0;
  int consumed = 0;
  const int got = std::sscanf(text.c_str(), "%4d-%2d-%2d%c%2d:%2d%n", &ts.year, &ts.month,
                              &ts.day, &sep, &ts.hour, &ts.minute, &consumed);
  if (got != 6 || (sep != 'T' && sep != ' ')) return false;
  if (static_cast<std::size_t>(consumed) < text.size()) {
    int sec = 0, more = 0;
    if (std::sscanf(text.c_str() + consumed, ":%2d%n", &sec, &more) == 1) {
      ts.second = sec;
      consumed += more;
    }
  }
  for (std::size_t i = consumed; i < text.size(); ++i)
    if (!std::isspace(static_cast<unsigned char>(text[i]))) return false;
  if (ts.month < 1 || ts.month > 12 || ts.day < 1 || ts.day > 31) return false;
  if (ts.hour < 0 || ts.hour > 23 || ts.minute < 0 || ts.minute > 59) return false;
  if (ts.second < 0 || ts.second > 60) return false;
  out = ts;
  return true;
}

inline std::string strip(const std::string& s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

}  // namespace detail

inline PriceSeries parse_price_csv(std::istream& in, const std::string& name) {
  PriceSeries series;
  std::string line;
  std::size_t lineno = 0;
  bool saw_header = false;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string t = detail::strip(line);
    if (t.empty()) continue;
    if (!saw_header) {
      // Header row is required; accept any column labels.
      if (t.find(',') == std::string::npos)
        throw std::invalid_argument(name + ":" + std::to_string(lineno) +
                                    ": expected 'timestamp,price' header");
      saw_header = true;
      continue;
    }
    const std::size_t comma = t.find(',');
    if (comma == std::string::npos)
      throw std::invalid_argument(name + ":" + std::to_string(lineno) + ": missing comma");
    PricePoint p;
    if (!detail::parse_timestamp(detail::strip(t.substr(0, comma)), p.when))
      throw std::invalid_argument(name + ":" + std::to_string(lineno) + ": bad timestamp");
    const std::string ptext = detail::strip(t.substr(comma + 1));
    try {
      std::size_t used = 0;
      p.price = std::stod(ptext, &used);
      if (used != ptext.size()) throw std::invalid_argument("trailing junk");
    } catch (const std::exception&) {
      throw std::invalid_argument(name + ":" + std::to_string(lineno) + ": bad price value");
    }
    if (!std::isfinite(p.price) || p.price < 0.0)
      throw std::invalid_argument(name + ":" + std::to_string(lineno) +
                                  ": price must be finite and >= 0");
    if (!series.points.empty() &&
        p.when.epoch_seconds() <= series.points.back().when.epoch_seconds())
      throw std::invalid_argument(name + ":" + std::to_string(lineno) +
                                  ": timestamps must be strictly increasing");
    series.points.push_back(p);
  }
  if (!saw_header) throw std::invalid_argument(name + ": empty file");
  return series;
}

inline PriceSeries load_price_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open price CSV: " + path);
  return parse_price_csv(in, path);
}

// Keep rows whose hour lies in [start_hour, end_hour). The default trading
// window used throughout is hours 8..24.
inline PriceSeries filter_hour_window(const PriceSeries& series, int start_hour, int end_hour) {
  if (start_hour < 0 || end_hour > 24 || start_hour >= end_hour)
    throw std::invalid_argument("filter_hour_window: need 0 <= start < end <= 24");
  PriceSeries out;
  for (const auto& p : series.points)
    if (p.when.hour >= start_hour && p.when.hour < end_hour) out.points.push_back(p);
  return out;
}

struct DayBlock {
  std::string date;
  std::vector<double> prices;
};

// Group rows by calendar date; keep only dates carrying exactly
// `block_len` rows so every block is a complete trading day.
inline std::vector<DayBlock> day_blocks(const PriceSeries& series, std::size_t block_len) {
  if (block_len == 0) throw std::invalid_argument("day_blocks: block_len must be positive");
  std::vector<DayBlock> all;
  for (const auto& p : series.points) {
    const std::string d = p.when.date();
    if (all.empty() || all.back().date != d) all.push_back({d, {}});
    all.back().prices.push_back(p.price);
  }
  std::vector<DayBlock> out;
  for (auto& b : all)
    if (b.prices.size() == block_len) out.push_back(std::move(b));
  return out;
}

}  // namespace rampstor
