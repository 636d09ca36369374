#include "mmpde/mesh_io.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace mmpde {

namespace {

// Tokenizer that strips '#' comments and tracks line numbers for errors.
class TokenStream {
 public:
  explicit TokenStream(const std::string& text) : in_(text) {}

  bool next(std::string& tok) {
    while (true) {
      if (pos_ >= line_.size()) {
        if (!std::getline(in_, line_)) return false;
        ++line_number_;
        pos_ = 0;
        continue;
      }
      while (pos_ < line_.size() && std::isspace(static_cast<unsigned char>(line_[pos_]))) ++pos_;
      if (pos_ >= line_.size() || line_[pos_] == '#') {
        pos_ = line_.size();
        continue;
      }
      size_t start = pos_;
      while (pos_ < line_.size() && !std::isspace(static_cast<unsigned char>(line_[pos_])) && line_[pos_] != '#') ++pos_;
      tok = line_.substr(start, pos_ - start);
      return true;
    }
  }

  long expect_int(const char* what) {
    std::string tok;
    if (!next(tok)) throw ParseError(std::string("unexpected end of input, expected ") + what, line_number_);
    try {
      size_t used = 0;
      long v = std::stol(tok, &used);
      if (used != tok.size()) throw std::invalid_argument(tok);
      return v;
    } catch (const std::exception&) {
      throw ParseError("expected integer " + std::string(what) + ", got '" + tok + "'", line_number_);
    }
  }

  double expect_double(const char* what) {
    std::string tok;
    if (!next(tok)) throw ParseError(std::string("unexpected end of input, expected ") + what, line_number_);
    try {
      size_t used = 0;
      double v = std::stod(tok, &used);
      if (used != tok.size()) throw std::invalid_argument(tok);
      return v;
    } catch (const std::exception&) {
      throw ParseError("expected number " + std::string(what) + ", got '" + tok + "'", line_number_);
    }
  }

  int line_number() const { return line_number_; }

 private:
  std::istringstream in_;
  std::string line_;
  size_t pos_ = 0;
  int line_number_ = 0;
};

}  // namespace

SimplicialMesh read_mesh(const std::string& node_text, const std::string& ele_text) {
  SimplicialMesh mesh;

  TokenStream nodes(node_text);
  const long nv = nodes.expect_int("vertex count");
  const long dim = nodes.expect_int("dimension");
  const long n_attr = nodes.expect_int("attribute count");
  const long has_marker = nodes.expect_int("marker flag");
  if (nv < 1) throw ParseError("vertex count must be positive", nodes.line_number());
  if (dim != 2 && dim != 3) throw ParseError("dimension must be 2 or 3", nodes.line_number());
  if (has_marker != 0 && has_marker != 1) throw ParseError("marker flag must be 0 or 1", nodes.line_number());

  mesh.dim = static_cast<int>(dim);
  mesh.vertices.assign(nv, Vec(mesh.dim));
  if (has_marker) mesh.markers.assign(nv, 0);

  long base = -1;
  std::vector<char> seen(nv, 0);
  for (long i = 0; i < nv; ++i) {
    long idx = nodes.expect_int("vertex index");
    if (base < 0) {
      if (idx != 0 && idx != 1)
        throw IndexBaseError("first vertex index is " + std::to_string(idx) + ", expected 0 or 1");
      base = idx;
    }
    idx -= base;
    if (idx < 0 || idx >= nv)
      throw IndexBaseError("vertex index " + std::to_string(idx + base) + " outside " +
                           std::to_string(base) + "-based range");
    if (seen[idx]) throw ParseError("duplicate vertex index " + std::to_string(idx + base), nodes.line_number());
    seen[idx] = 1;
    for (int c = 0; c < mesh.dim; ++c) mesh.vertices[idx][c] = nodes.expect_double("coordinate");
    for (long a = 0; a < n_attr; ++a) nodes.expect_double("attribute");
    if (has_marker) mesh.markers[idx] = static_cast<int>(nodes.expect_int("marker"));
  }

  TokenStream eles(ele_text);
  const long ne = eles.expect_int("element count");
  const long npe = eles.expect_int("nodes per element");
  eles.expect_int("element attribute count");
  if (npe != dim + 1)
    throw ParseError("expected " + std::to_string(dim + 1) + " nodes per element, got " + std::to_string(npe),
                     eles.line_number());

  mesh.elements.assign(ne, {0, 0, 0, 0});
  std::vector<char> eseen(ne, 0);
  long ebase = -1;
  for (long k = 0; k < ne; ++k) {
    long idx = eles.expect_int("element index");
    if (ebase < 0) {
      if (idx != 0 && idx != 1)
        throw IndexBaseError("first element index is " + std::to_string(idx) + ", expected 0 or 1");
      ebase = idx;
    }
    idx -= ebase;
    if (idx < 0 || idx >= ne)
      throw IndexBaseError("element index " + std::to_string(idx + ebase) + " outside " +
                           std::to_string(ebase) + "-based range");
    if (eseen[idx]) throw ParseError("duplicate element index " + std::to_string(idx + ebase), eles.line_number());
    eseen[idx] = 1;
    for (long j = 0; j <= dim; ++j) {
      long v = eles.expect_int("element vertex") - base;
      if (v < 0 || v >= nv)
        throw IndexBaseError("element vertex index " + std::to_string(v + base) +
                             " inconsistent with detected " + std::to_string(base) + "-based numbering");
      mesh.elements[idx][j] = static_cast<int>(v);
    }
  }
  return mesh;
}

std::string write_node(const SimplicialMesh& mesh) {
  std::string out;
  char buf[80];
  const bool markers = !mesh.markers.empty();
  std::snprintf(buf, sizeof buf, "%d %d 0 %d\n", mesh.n_vertices(), mesh.dim, markers ? 1 : 0);
  out += buf;
  for (int i = 0; i < mesh.n_vertices(); ++i) {
    std::snprintf(buf, sizeof buf, "%d", i + 1);
    out += buf;
    for (int c = 0; c < mesh.dim; ++c) {
      std::snprintf(buf, sizeof buf, " %.17g", mesh.vertices[i][c]);
      out += buf;
    }
    if (markers) {
      std::snprintf(buf, sizeof buf, " %d", mesh.markers[i]);
      out += buf;
    }
    out += '\n';
  }
  return out;
}

std::string write_ele(const SimplicialMesh& mesh) {
  std::string out;
  char buf[80];
  std::snprintf(buf, sizeof buf, "%d %d 0\n", mesh.n_elements(), mesh.dim + 1);
  out += buf;
  for (int k = 0; k < mesh.n_elements(); ++k) {
    std::snprintf(buf, sizeof buf, "%d", k + 1);
    out += buf;
    for (int j = 0; j <= mesh.dim; ++j) {
      std::snprintf(buf, sizeof buf, " %d", mesh.elements[k][j] + 1);
      out += buf;
    }
    out += '\n';
  }
  return out;
}

namespace {

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw MeshError("could not open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

SimplicialMesh load_mesh(const std::string& node_path, const std::string& ele_path) {
  return read_mesh(slurp(node_path), slurp(ele_path));
}

void save_mesh(const SimplicialMesh& mesh, const std::string& node_path, const std::string& ele_path) {
  write_text_file(node_path, write_node(mesh));
  write_text_file(ele_path, write_ele(mesh));
}

std::vector<double> read_vertex_field(const std::string& text, int n_vertices) {
  TokenStream ts(text);
  std::vector<double> values;
  values.reserve(n_vertices);
  for (int i = 0; i < n_vertices; ++i) values.push_back(ts.expect_double("field value"));
  return values;
}

std::vector<double> load_vertex_field(const std::string& path, int n_vertices) {
  return read_vertex_field(slurp(path), n_vertices);
}

void write_text_file(const std::string& path, const std::string& content) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::trunc);
    if (!out) throw MeshError("could not open '" + tmp + "' for writing");
    out << content;
    if (!out) throw MeshError("write to '" + tmp + "' failed");
  }
  std::filesystem::rename(tmp, path);
}

}  // namespace mmpde
