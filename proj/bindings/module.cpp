#include <pybind11/pybind11.h>
PYBIND11_MODULE(_cadfit, m) { m.doc() = "cadfit bindings"; }
