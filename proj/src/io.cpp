#include "shapelab/io.hpp"

#include <cerrno>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "shapelab/errors.hpp"

namespace shapelab {

void write_file_atomic(const std::string& path, const std::string& contents) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot open '" + tmp + "': " + std::strerror(errno));
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    out.flush();
    if (!out) throw Error("cannot write '" + tmp + "': " + std::strerror(errno));
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw Error("cannot rename '" + tmp + "' to '" + path + "': " + ec.message());
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open '" + path + "': " + std::strerror(errno));
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void save_grid_fields(const std::string& path, const std::vector<NamedField>& fields) {
  if (fields.empty()) throw ValidationError("no fields to save");
  const Grid& g = fields.front().second.grid();
  nlohmann::json header;
  header["format"] = "shapelab-grid";
  header["version"] = 1;
  std::vector<double> origin, spacing;
  for (int a = 0; a < g.dim(); ++a) {
    origin.push_back(g.origin(a));
    spacing.push_back(g.step(a));
  }
  header["dims"] = g.counts();
  header["origin"] = origin;
  header["spacing"] = spacing;
  std::vector<std::string> names;
  for (const auto& [name, f] : fields) {
    if (!(f.grid() == g)) throw ValidationError("field '" + name + "' lives on a different grid");
    names.push_back(name);
  }
  header["fields"] = names;
  std::string out = header.dump() + "\n";
  for (const auto& [name, f] : fields) {
    const auto* bytes = reinterpret_cast<const char*>(f.values().data());
    out.append(bytes, f.size() * sizeof(double));
  }
  write_file_atomic(path, out);
}

std::vector<NamedField> load_grid_fields(const std::string& path) {
  const std::string data = read_file(path);
  const auto nl = data.find('\n');
  if (nl == std::string::npos) throw ValidationError("'" + path + "' has no grid header");
  nlohmann::json header;
  try {
    header = nlohmann::json::parse(data.substr(0, nl));
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError("'" + path + "': bad grid header: " + e.what());
  }
  if (header.value("format", "") != "shapelab-grid") throw ValidationError("'" + path + "' is not a shapelab grid file");
  const Grid g(header.at("origin").get<std::vector<double>>(), header.at("spacing").get<std::vector<double>>(),
               header.at("dims").get<std::vector<int>>());
  const auto names = header.at("fields").get<std::vector<std::string>>();
  const std::size_t need = names.size() * g.size() * sizeof(double);
  if (data.size() - nl - 1 != need) throw ValidationError("'" + path + "': payload size does not match header");
  std::vector<NamedField> out;
  const char* p = data.data() + nl + 1;
  for (const auto& name : names) {
    std::vector<double> v(g.size());
    std::memcpy(v.data(), p, g.size() * sizeof(double));
    p += g.size() * sizeof(double);
    out.emplace_back(name, Field(g, std::move(v)));
  }
  return out;
}

}  // namespace shapelab
