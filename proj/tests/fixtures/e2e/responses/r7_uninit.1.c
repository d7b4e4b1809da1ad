#include <stdio.h>
#include <stdlib.h>

int main(void) {
  int *flags = calloc(4, sizeof *flags);
  if (!flags) return 1;
  if (flags[2]) printf("set\n");
  free(flags);
  return 0;
}
