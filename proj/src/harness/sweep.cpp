#include "entlink/sweep.hpp"

#include <cmath>
#include <nlohmann/json.hpp>
#include <sstream>

#include "entlink/errors.hpp"
#include "entlink/format.hpp"
#include "ini.hpp"

namespace entlink::harness {
namespace {

std::vector<ini::Field<LinkSweep>> sweep_fields() {
  using W = LinkSweep;
  return {
      ini::number("sweep", "name", &W::name),
      ini::number("sweep", "kind", &W::kind),
      ini::number("sweep", "wavelength_m", &W::wavelength_m),
      ini::number("sweep", "aperture_m", &W::aperture_m),
      ini::number("sweep", "distance_m", &W::distance_m),
      ini::number("sweep", "start", &W::start),
      ini::number("sweep", "stop", &W::stop),
      ini::number("sweep", "points", &W::points),
      ini::number("sweep", "spacing", &W::spacing),
      ini::number("sweep", "waist", &W::waist),
      ini::number("sweep", "waist_w0_m", &W::waist_w0_m),
      ini::number("sweep", "waist_bound", &W::waist_bound),
  };
}

}  // namespace

void LinkSweep::validate() const {
  auto fail = [](const std::string& key, const std::string& what) {
    throw ValidationError("field 'sweep." + key + "': " + what);
  };
  if (name.empty()) fail("name", "is required");
  if (kind != "distance" && kind != "aperture") fail("kind", "must be 'distance' or 'aperture'");
  if (!(wavelength_m > 0.0)) fail("wavelength_m", "must be > 0");
  if (!(aperture_m > 0.0)) fail("aperture_m", "must be > 0");
  if (!(distance_m > 0.0)) fail("distance_m", "must be > 0");
  if (!(start > 0.0)) fail("start", "must be > 0");
  if (!(stop > start)) fail("stop", "must exceed start");
  if (points < 2) fail("points", "must be >= 2");
  if (spacing != "linear" && spacing != "log") fail("spacing", "must be 'linear' or 'log'");
  if (waist != "optimal" && waist != "fixed") fail("waist", "must be 'optimal' or 'fixed'");
  if (waist == "fixed" && !(waist_w0_m > 0.0)) fail("waist_w0_m", "must be > 0 for a fixed waist");
  if (!(waist_bound > 0.0)) fail("waist_bound", "must be > 0");
}

std::vector<double> LinkSweep::grid() const {
  std::vector<double> g(points);
  const double n = static_cast<double>(points - 1);
  for (std::size_t i = 0; i < points; ++i) {
    const double t = static_cast<double>(i) / n;
    g[i] = spacing == "log" ? start * std::pow(stop / start, t) : start + (stop - start) * t;
  }
  g.back() = stop;
  return g;
}

LinkSweep parse_sweep(std::string_view text) {
  LinkSweep s;
  ini::apply(ini::parse(text), sweep_fields(), s);
  s.validate();
  return s;
}

SweepTable run_linkbudget(const LinkSweep& sweep) {
  sweep.validate();
  const auto mode = sweep.waist == "fixed" ? optics::WaistMode::fixed(sweep.waist_w0_m)
                                           : optics::WaistMode::optimal(sweep.waist_bound);
  const auto grid = sweep.grid();
  SweepTable table;
  if (sweep.kind == "distance") {
    table.x_column = "distance_m";
    table.rows = optics::distance_loss_table(
        optics::BeamGeometry::symmetric(sweep.aperture_m, mode, sweep.wavelength_m), grid);
  } else {
    table.x_column = "aperture_m";
    optics::BeamGeometry base{sweep.wavelength_m, sweep.start, sweep.start, mode};
    table.rows = optics::aperture_loss_table(base, sweep.distance_m, grid);
  }
  // Tolerance absorbs the Brent search resolution on flat stretches.
  constexpr double kSlack = 1e-9;
  for (std::size_t i = 1; i < table.rows.size(); ++i) {
    const double d = table.rows[i].loss_db - table.rows[i - 1].loss_db;
    const bool ok = sweep.kind == "distance" ? d >= -kSlack : d <= kSlack;
    if (!ok)
      throw DivergenceError("loss table is not monotone at " + table.x_column + " = " +
                            format_number(table.rows[i].x));
  }
  return table;
}

std::string sweep_to_csv(const SweepTable& table) {
  std::ostringstream out;
  optics::write_loss_csv(out, table.rows, table.x_column);
  return out.str();
}

nlohmann::json sweep_to_json(const LinkSweep& sweep, const SweepTable& table) {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& r : table.rows) rows.push_back({{table.x_column, r.x}, {"loss_db", r.loss_db}});
  return {{"sweep", sweep.name}, {"kind", sweep.kind}, {"waist", sweep.waist}, {"rows", rows}};
}

}  // namespace entlink::harness
