#pragma once

#include <string>

#include "mmpde/mesh.hpp"

namespace mmpde {

// Triangle/TetGen-compatible exchange format.
//   .node: header "N_v d 0 B" (B in {0,1}), rows "idx x1 .. xd [marker]"
//   .ele:  header "N d+1 0",   rows "idx v0 .. vd"
// Index base (0 or 1) is auto-detected from the first listed index; writers
// emit 1-based indices. '#' starts a comment; whitespace separates tokens.
SimplicialMesh read_mesh(const std::string& node_text, const std::string& ele_text);
std::string write_node(const SimplicialMesh& mesh);
std::string write_ele(const SimplicialMesh& mesh);

SimplicialMesh load_mesh(const std::string& node_path, const std::string& ele_path);
void save_mesh(const SimplicialMesh& mesh, const std::string& node_path, const std::string& ele_path);

// One whitespace-separated value per vertex, .node ordering.
std::vector<double> read_vertex_field(const std::string& text, int n_vertices);
std::vector<double> load_vertex_field(const std::string& path, int n_vertices);

// Atomic text write (write temp file, then rename).
void write_text_file(const std::string& path, const std::string& content);

}  // namespace mmpde
