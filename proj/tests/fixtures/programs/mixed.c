#include <stdio.h>
int main(void) {
  unsigned u = 7;
  char *p = 42;
  float f = "text";
  if (u = 3) puts("x");
  printf("%d\n", "not a number");
  return undefined_name;
}
