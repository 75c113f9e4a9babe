public class Counter {
    private int limit;
    public Counter(int start) {
        limit = start;
    }
    public int sum(int count) {
        int total = 0;
        for (int i = 0; i < count; i++) {
            total = total + i;
        }
        return total;
    }
    public String label(String name) {
        String text = "count: ";
        if (name == null) {
            return text;
        }
        return text + name;
    }
    public boolean check(List<String> items) {
        boolean found = false;
        for (String item : items) {
            if (item.isEmpty()) {
                found = true;
            }
        }
        return found;
    }
    public void print(double rate) {
        System.out.println(rate * limit);
    }
}
