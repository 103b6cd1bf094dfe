#include "stylegraph/graph_io.hpp"

#include <charconv>
#include <map>
#include <set>
#include <sstream>

#include <boost/property_tree/ptree.hpp>
#include <boost/property_tree/xml_parser.hpp>

#include "io_util.hpp"
#include "stylegraph/errors.hpp"

namespace stylegraph {

namespace pt = boost::property_tree;

namespace {

double parse_weight(const std::string& text) {
  double value = 0.0;
  const char* first = text.data();
  const char* last = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || ptr != last) {
    throw ValidationError("malformed number '" + text + "' in graph file");
  }
  return value;
}

std::string csv_field(const std::string& value) {
  if (value.find_first_of(",\"\n\r") == std::string::npos) return value;
  std::string out = "\"";
  for (char c : value) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

// RFC 4180 records; quoted fields may span lines.
std::vector<std::vector<std::string>> parse_csv(const std::string& text) {
  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> row;
  std::string field;
  bool quoted = false;
  bool row_has_content = false;
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        field += c;
      }
      continue;
    }
    switch (c) {
      case '"':
        quoted = true;
        row_has_content = true;
        break;
      case ',':
        row.push_back(std::move(field));
        field.clear();
        row_has_content = true;
        break;
      case '\r':
        break;
      case '\n':
        if (row_has_content || !field.empty()) {
          row.push_back(std::move(field));
          rows.push_back(std::move(row));
        }
        row.clear();
        field.clear();
        row_has_content = false;
        break;
      default:
        field += c;
        row_has_content = true;
    }
  }
  if (quoted) throw ValidationError("unterminated quoted field in CSV");
  if (row_has_content || !field.empty()) {
    row.push_back(std::move(field));
    rows.push_back(std::move(row));
  }
  return rows;
}

pt::ptree parse_xml(const std::string& text) {
  std::istringstream in(text);
  pt::ptree tree;
  try {
    pt::read_xml(in, tree);
  } catch (const pt::xml_parser_error& e) {
    throw ValidationError(std::string("malformed XML: ") + e.what());
  }
  return tree;
}

std::string attr(const pt::ptree& node, const char* name) {
  // '/' as separator so dotted names like attr.name stay one key
  auto value = node.get_optional<std::string>(
      pt::ptree::path_type(std::string("<xmlattr>/") + name, '/'));
  if (!value) throw ValidationError(std::string("missing XML attribute '") + name + "'");
  return *value;
}

std::string render_graphml(const ExportedGraph& g) {
  std::ostringstream out;
  out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
      << "<graphml xmlns=\"http://graphml.graphdrawing.org/xmlns\" "
         "xmlns:xsi=\"http://www.w3.org/2001/XMLSchema-instance\" "
         "xsi:schemaLocation=\"http://graphml.graphdrawing.org/xmlns "
         "http://graphml.graphdrawing.org/xmlns/1.0/graphml.xsd\">\n"
      << "  <key id=\"sku\" for=\"node\" attr.name=\"sku\" attr.type=\"string\"/>\n"
      << "  <key id=\"group\" for=\"node\" attr.name=\"group\" attr.type=\"string\"/>\n"
      << "  <key id=\"weighted_degree\" for=\"node\" attr.name=\"weighted_degree\" "
         "attr.type=\"double\"/>\n"
      << "  <key id=\"weight\" for=\"edge\" attr.name=\"weight\" attr.type=\"double\"/>\n"
      << "  <graph id=\"G\" edgedefault=\"undirected\">\n";
  for (const auto& n : g.nodes) {
    out << "    <node id=\"" << detail::xml_escape(n.id) << "\">"
        << "<data key=\"sku\">" << detail::xml_escape(n.sku) << "</data>"
        << "<data key=\"group\">" << detail::xml_escape(n.group) << "</data>"
        << "<data key=\"weighted_degree\">" << detail::format_double_sci(n.weighted_degree)
        << "</data></node>\n";
  }
  for (std::size_t i = 0; i < g.edges.size(); ++i) {
    const auto& e = g.edges[i];
    out << "    <edge id=\"e" << i << "\" source=\"" << detail::xml_escape(e.source)
        << "\" target=\"" << detail::xml_escape(e.target) << "\">"
        << "<data key=\"weight\">" << detail::format_double_sci(e.weight)
        << "</data></edge>\n";
  }
  out << "  </graph>\n</graphml>\n";
  return out.str();
}

ExportedGraph parse_graphml(const std::string& text) {
  const pt::ptree tree = parse_xml(text);
  const auto root = tree.get_child_optional("graphml");
  if (!root) throw ValidationError("not a GraphML document");

  // key id -> attribute name
  std::map<std::string, std::string> keys;
  for (const auto& [tag, child] : *root) {
    if (tag == "key") keys[attr(child, "id")] = attr(child, "attr.name");
  }
  const auto graph = root->get_child_optional("graph");
  if (!graph) throw ValidationError("GraphML document has no <graph>");

  ExportedGraph out;
  for (const auto& [tag, child] : *graph) {
    if (tag != "node" && tag != "edge") continue;
    std::map<std::string, std::string> data;
    for (const auto& [dtag, d] : child) {
      if (dtag == "data") data[keys[attr(d, "key")]] = d.get_value<std::string>();
    }
    if (tag == "node") {
      ExportNode n;
      n.id = attr(child, "id");
      n.sku = data["sku"];
      n.group = data["group"];
      if (data.count("weighted_degree")) n.weighted_degree = parse_weight(data["weighted_degree"]);
      out.nodes.push_back(std::move(n));
    } else {
      if (!data.count("weight")) throw ValidationError("GraphML edge without weight");
      out.edges.push_back({attr(child, "source"), attr(child, "target"),
                           parse_weight(data["weight"])});
    }
  }
  return out;
}

std::string render_gexf(const ExportedGraph& g) {
  std::ostringstream out;
  out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
      << "<gexf xmlns=\"http://gexf.net/1.3\" "
         "xmlns:xsi=\"http://www.w3.org/2001/XMLSchema-instance\" "
         "xsi:schemaLocation=\"http://gexf.net/1.3 http://gexf.net/1.3/gexf.xsd\" "
         "version=\"1.3\">\n"
      << "  <graph mode=\"static\" defaultedgetype=\"undirected\">\n"
      << "    <attributes class=\"node\">\n"
      << "      <attribute id=\"sku\" title=\"sku\" type=\"string\"/>\n"
      << "      <attribute id=\"group\" title=\"group\" type=\"string\"/>\n"
      << "      <attribute id=\"weighted_degree\" title=\"weighted_degree\" "
         "type=\"double\"/>\n"
      << "    </attributes>\n"
      << "    <nodes>\n";
  for (const auto& n : g.nodes) {
    out << "      <node id=\"" << detail::xml_escape(n.id) << "\" label=\""
        << detail::xml_escape(n.id) << "\"><attvalues>"
        << "<attvalue for=\"sku\" value=\"" << detail::xml_escape(n.sku) << "\"/>"
        << "<attvalue for=\"group\" value=\"" << detail::xml_escape(n.group) << "\"/>"
        << "<attvalue for=\"weighted_degree\" value=\""
        << detail::format_double_sci(n.weighted_degree) << "\"/>"
        << "</attvalues></node>\n";
  }
  out << "    </nodes>\n    <edges>\n";
  for (std::size_t i = 0; i < g.edges.size(); ++i) {
    const auto& e = g.edges[i];
    out << "      <edge id=\"" << i << "\" source=\"" << detail::xml_escape(e.source)
        << "\" target=\"" << detail::xml_escape(e.target) << "\" weight=\""
        << detail::format_double_sci(e.weight) << "\"/>\n";
  }
  out << "    </edges>\n  </graph>\n</gexf>\n";
  return out.str();
}

ExportedGraph parse_gexf(const std::string& text) {
  const pt::ptree tree = parse_xml(text);
  const auto graph = tree.get_child_optional("gexf.graph");
  if (!graph) throw ValidationError("not a GEXF document");

  std::map<std::string, std::string> titles;
  for (const auto& [tag, block] : *graph) {
    if (tag != "attributes") continue;
    for (const auto& [atag, a] : block) {
      if (atag == "attribute") titles[attr(a, "id")] = attr(a, "title");
    }
  }

  ExportedGraph out;
  if (auto nodes = graph->get_child_optional("nodes")) {
    for (const auto& [tag, n] : *nodes) {
      if (tag != "node") continue;
      ExportNode node;
      node.id = attr(n, "id");
      if (auto values = n.get_child_optional("attvalues")) {
        for (const auto& [vtag, v] : *values) {
          if (vtag != "attvalue") continue;
          const std::string& title = titles[attr(v, "for")];
          const std::string value = attr(v, "value");
          if (title == "sku") node.sku = value;
          else if (title == "group") node.group = value;
          else if (title == "weighted_degree") node.weighted_degree = parse_weight(value);
        }
      }
      out.nodes.push_back(std::move(node));
    }
  }
  if (auto edges = graph->get_child_optional("edges")) {
    for (const auto& [tag, e] : *edges) {
      if (tag != "edge") continue;
      out.edges.push_back(
          {attr(e, "source"), attr(e, "target"), parse_weight(attr(e, "weight"))});
    }
  }
  return out;
}

std::string render_edge_csv(const ExportedGraph& g) {
  std::string out = "source,target,weight\n";
  for (const auto& e : g.edges) {
    out += csv_field(e.source) + "," + csv_field(e.target) + "," +
           detail::format_double_sci(e.weight) + "\n";
  }
  return out;
}

ExportedGraph parse_edge_csv(const std::string& text) {
  const auto rows = parse_csv(text);
  if (rows.empty() || rows[0] != std::vector<std::string>{"source", "target", "weight"}) {
    throw ValidationError("edge CSV must start with the header 'source,target,weight'");
  }
  ExportedGraph out;
  std::set<std::string> seen;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    if (rows[i].size() != 3) throw ValidationError("edge CSV row with wrong field count");
    out.edges.push_back({rows[i][0], rows[i][1], parse_weight(rows[i][2])});
    for (const auto* id : {&rows[i][0], &rows[i][1]}) {
      if (seen.insert(*id).second) out.nodes.push_back({*id, "", "", 0.0});
    }
  }
  return out;
}

}  // namespace

ExportFormat parse_export_format(std::string_view name) {
  if (name == "graphml") return ExportFormat::kGraphml;
  if (name == "gexf") return ExportFormat::kGexf;
  if (name == "edge-csv" || name == "csv") return ExportFormat::kEdgeCsv;
  throw ValidationError("unknown graph format '" + std::string(name) +
                        "' (expected graphml, gexf or edge-csv)");
}

std::string_view export_format_name(ExportFormat format) {
  switch (format) {
    case ExportFormat::kGraphml: return "graphml";
    case ExportFormat::kGexf: return "gexf";
    case ExportFormat::kEdgeCsv: return "edge-csv";
  }
  return "";
}

ExportFormat format_for_path(const std::filesystem::path& path) {
  const std::string ext = path.extension().string();
  if (ext == ".graphml") return ExportFormat::kGraphml;
  if (ext == ".gexf") return ExportFormat::kGexf;
  if (ext == ".csv") return ExportFormat::kEdgeCsv;
  throw ValidationError("cannot infer graph format from '" + path.string() + "'");
}

ExportedGraph to_export(const SimilarityGraph& graph) {
  ExportedGraph out;
  const auto wdeg = graph.weighted_degrees();
  for (std::size_t i = 0; i < graph.node_count(); ++i) {
    const auto& n = graph.nodes()[i];
    out.nodes.push_back({n.id, n.sku, n.group, wdeg[i]});
  }
  for (const auto& e : graph.edges()) {
    out.edges.push_back({graph.nodes()[e.u].id, graph.nodes()[e.v].id, e.weight});
  }
  return out;
}

ExportedGraph to_export(const GroupGraph& graph) {
  ExportedGraph out;
  for (const auto& g : graph.groups) out.nodes.push_back({g.name, "", g.name, g.degree_sum});
  for (const auto& e : graph.edges) {
    out.edges.push_back({graph.groups[e.a].name, graph.groups[e.b].name, e.weight});
  }
  return out;
}

SimilarityGraph graph_from_export(const ExportedGraph& exported) {
  std::vector<GraphNode> nodes;
  std::map<std::string, std::size_t> index;
  for (const auto& n : exported.nodes) {
    index.emplace(n.id, nodes.size());
    nodes.push_back({n.id, n.sku.empty() ? n.id : n.sku, n.group});
  }
  std::vector<GraphEdge> edges;
  for (const auto& e : exported.edges) {
    auto u = index.find(e.source);
    auto v = index.find(e.target);
    if (u == index.end() || v == index.end()) {
      throw DanglingReferenceError("edge references an unknown node",
                                   {u == index.end() ? e.source : e.target});
    }
    edges.push_back({u->second, v->second, e.weight});
  }
  return SimilarityGraph(std::move(nodes), std::move(edges));
}

std::string render_graph(const ExportedGraph& graph, ExportFormat format) {
  switch (format) {
    case ExportFormat::kGraphml: return render_graphml(graph);
    case ExportFormat::kGexf: return render_gexf(graph);
    case ExportFormat::kEdgeCsv: return render_edge_csv(graph);
  }
  throw InvariantError("unhandled export format");
}

ExportedGraph parse_graph(const std::string& text, ExportFormat format) {
  switch (format) {
    case ExportFormat::kGraphml: return parse_graphml(text);
    case ExportFormat::kGexf: return parse_gexf(text);
    case ExportFormat::kEdgeCsv: return parse_edge_csv(text);
  }
  throw InvariantError("unhandled export format");
}

std::string render_nodes_csv(const ExportedGraph& graph) {
  std::string out = "id,sku,group,weighted_degree\n";
  for (const auto& n : graph.nodes) {
    out += csv_field(n.id) + "," + csv_field(n.sku) + "," + csv_field(n.group) + "," +
           detail::format_double_sci(n.weighted_degree) + "\n";
  }
  return out;
}

void parse_nodes_csv(const std::string& text, ExportedGraph& graph) {
  const auto rows = parse_csv(text);
  if (rows.empty() ||
      rows[0] != std::vector<std::string>{"id", "sku", "group", "weighted_degree"}) {
    throw ValidationError("node CSV must start with 'id,sku,group,weighted_degree'");
  }
  graph.nodes.clear();
  for (std::size_t i = 1; i < rows.size(); ++i) {
    if (rows[i].size() != 4) throw ValidationError("node CSV row with wrong field count");
    graph.nodes.push_back({rows[i][0], rows[i][1], rows[i][2], parse_weight(rows[i][3])});
  }
}

std::filesystem::path nodes_sidecar_path(const std::filesystem::path& edge_csv) {
  std::filesystem::path out = edge_csv;
  out.replace_filename(edge_csv.stem().string() + ".nodes" + edge_csv.extension().string());
  return out;
}

void export_graph(const ExportedGraph& graph, ExportFormat format,
                  const std::filesystem::path& path) {
  detail::write_text_file(path, render_graph(graph, format));
  if (format == ExportFormat::kEdgeCsv) {
    detail::write_text_file(nodes_sidecar_path(path), render_nodes_csv(graph));
  }
}

ExportedGraph import_graph(const std::filesystem::path& path, ExportFormat format) {
  ExportedGraph g = parse_graph(detail::read_text_file(path), format);
  if (format == ExportFormat::kEdgeCsv) {
    const auto sidecar = nodes_sidecar_path(path);
    if (std::filesystem::exists(sidecar)) parse_nodes_csv(detail::read_text_file(sidecar), g);
  }
  return g;
}

}  // namespace stylegraph
