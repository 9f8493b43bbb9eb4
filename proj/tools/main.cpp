#include "sotrack/sotrack.hpp"

int main() { return 0; }
